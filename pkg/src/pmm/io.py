"""JSON interchange: input towers, barcodes, presentations, reports, models.

One canonical machine format; rational numbers travel as exact strings
("1/3", never decimals), outputs are deterministic (sorted keys, fixed
orderings, no timestamps), and every document carries enough structure to
be reloaded and re-validated.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .cdga import (
    Algebra, CdgaElement, CdgaMorphism, FiniteCDGA, FreeCDGA, free_cdga,
    )
from .errors import ParseError, SchemaError, ValidationError
from .expressions import parse_expression, render_element
from .exactla import QMatrix
from .homotopy import CdgaHomotopy, IntervalElement
from .persistence import INF, Grid, PersistenceModule
from .pcomplex import PComplexMap, PersistentComplex
from .pminimal import (
    INTERNAL_HEADROOM, PersistentCDGA, TameMinimalModel, homotopy_barcode,
    presentation,
)

SCHEMA_VERSION = 1


def _rational(s, where="") -> Fraction:
    try:
        return Fraction(str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {s!r} {where}: {exc}") from exc


def _rational_str(q: Fraction) -> str:
    return str(q)


def _need(doc: dict, key: str, where: str):
    if key not in doc:
        raise SchemaError(f"missing key {key!r} in {where}")
    return doc[key]


# -- input documents ---------------------------------------------------------

def load_grid(doc) -> Grid:
    times = [_rational(t, "in grid") for t in doc]
    if not times:
        raise SchemaError("grid must be nonempty")
    try:
        return Grid(tuple(times))
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc


def _build_free_stage(spec: dict, cap: int, where: str) -> FreeCDGA:
    gens = []
    d_src = {}
    for g in _need(spec, "generators", where):
        name = _need(g, "name", where)
        degree = int(_need(g, "degree", where))
        gens.append((name, degree))
        d_src[name] = str(g.get("d", "0"))
    scratch = free_cdga(gens, {}, cap)
    diffs = {}
    for name, src in d_src.items():
        try:
            elem = parse_expression(src, scratch, require_homogeneous=True)
        except ParseError as exc:
            raise SchemaError(f"{where}: d({name}): {exc}") from exc
        diffs[name] = elem.terms
    try:
        return free_cdga(gens, diffs, cap)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _build_finite_stage(spec: dict, cap: int, where: str) -> FiniteCDGA:
    basis: dict[int, list[str]] = {}
    for entry in _need(spec, "basis", where):
        basis[int(_need(entry, "degree", where))] = list(_need(entry, "labels", where))
    unit = _need(spec, "unit", where)
    scratch = FiniteCDGA(basis={k: v for k, v in basis.items()}, unit=unit,
                         products={}, differential={}, degree_cap=cap)
    products = {}
    for entry in spec.get("products", []):
        left, right = _need(entry, "left", where), _need(entry, "right", where)
        value = parse_expression(str(_need(entry, "value", where)), scratch)
        products[(left, right)] = {scratch.label_of(k): c for k, c in value.terms.items()}
    differential = {}
    for entry in spec.get("differentials", []):
        lab = _need(entry, "of", where)
        value = parse_expression(str(_need(entry, "value", where)), scratch)
        differential[lab] = {scratch.label_of(k): c for k, c in value.terms.items()}
    try:
        return FiniteCDGA(basis=basis, unit=unit, products=products,
                          differential=differential, degree_cap=cap)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _build_stage_map(spec: dict, dom: Algebra, cod: Algebra, where: str) -> CdgaMorphism:
    images_spec = _need(spec, "images", where)
    images = {}
    for name, src in images_spec.items():
        try:
            images[name] = parse_expression(str(src), cod)
        except ParseError as exc:
            raise SchemaError(f"{where}: image of {name!r}: {exc}") from exc
    if dom.kind == "free":
        missing = {g.name for g in dom.generators} - set(images)
        if missing:
            raise SchemaError(f"{where}: missing images for {sorted(missing)}")
        return CdgaMorphism.on_generators(dom, cod, images)
    labels = [dom.label_of(k) for n in range(dom.degree_cap + 1)
              for k in dom.basis_keys(n)]
    images.setdefault(dom.unit_label, cod.one())
    missing = set(labels) - set(images)
    if missing:
        raise SchemaError(f"{where}: missing images for {sorted(missing)}")
    return CdgaMorphism.on_basis(dom, cod, images)


def load_input(doc: dict) -> PersistentCDGA:
    """Parse and validate a persistent-CDGA input document."""
    if not isinstance(doc, dict):
        raise SchemaError("input document must be a JSON object")
    grid = load_grid(_need(doc, "grid", "input"))
    user_cap = int(_need(doc, "degree_cap", "input"))
    if user_cap < 2:
        raise SchemaError("degree_cap must be at least 2")
    cap = user_cap + INTERNAL_HEADROOM
    stage_specs = _need(doc, "stages", "input")
    if len(stage_specs) != len(grid):
        raise SchemaError("stages must match grid length")
    stages = []
    for r, spec in enumerate(stage_specs):
        where = f"stage {r}"
        kind = _need(spec, "type", where)
        if kind == "free":
            stages.append(_build_free_stage(spec, cap, where))
        elif kind == "finite":
            stages.append(_build_finite_stage(spec, cap, where))
        else:
            raise SchemaError(f"{where}: unknown stage type {kind!r}")
    map_specs = _need(doc, "maps", "input")
    if len(map_specs) != len(grid) - 1:
        raise SchemaError("maps must cover consecutive stage pairs")
    maps = [_build_stage_map(spec, stages[r], stages[r + 1], f"map {r}")
            for r, spec in enumerate(map_specs)]
    return PersistentCDGA(grid, stages, maps, user_cap)


def load_input_file(path: str) -> PersistentCDGA:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return load_input(doc)


# -- persistence modules and complexes ---------------------------------------

def load_matrix(rows, want_rows: int, want_cols: int, where: str) -> QMatrix:
    data = [[_rational(x, where) for x in row] for row in rows]
    if len(data) != want_rows or any(len(r) != want_cols for r in data):
        raise SchemaError(f"{where}: matrix shape mismatch, "
                          f"want {want_rows}x{want_cols}")
    return QMatrix(want_rows, want_cols, data)


def load_persistence_module(doc: dict) -> PersistenceModule:
    grid = load_grid(_need(doc, "grid", "module"))
    dims = [int(x) for x in _need(doc, "dims", "module")]
    if len(dims) != len(grid):
        raise SchemaError("dims must match grid length")
    map_specs = _need(doc, "maps", "module")
    maps = [load_matrix(spec, dims[r + 1], dims[r], f"module map {r}")
            for r, spec in enumerate(map_specs)]
    try:
        return PersistenceModule(grid, tuple(dims), tuple(maps))
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc


def load_pcomplex(doc: dict) -> PersistentComplex:
    grid = load_grid(_need(doc, "grid", "complex"))
    max_degree = int(_need(doc, "max_degree", "complex"))
    stage_specs = _need(doc, "stages", "complex")
    if len(stage_specs) != len(grid):
        raise SchemaError("stages must match grid length")
    labels = []
    for spec in stage_specs:
        basis = _need(spec, "basis", "complex stage")
        labels.append([list(basis.get(str(k), [])) for k in range(max_degree + 1)])
    d = []
    for r, spec in enumerate(stage_specs):
        dd = {}
        for key, rows in spec.get("d", {}).items():
            k = int(key)
            dd[k] = load_matrix(rows, len(labels[r][k + 1]), len(labels[r][k]),
                                f"d({r},{k})")
        d.append(dd)
    sigma = []
    for r, spec in enumerate(_need(doc, "maps", "complex")):
        ss = {}
        for key, rows in spec.items():
            k = int(key)
            ss[k] = load_matrix(rows, len(labels[r + 1][k]), len(labels[r][k]),
                                f"sigma({r},{k})")
        sigma.append(ss)
    try:
        return PersistentComplex(grid, max_degree, labels, d, sigma)
    except ValidationError as exc:
        raise ValidationError(f"complex invalid: {exc}") from exc


def load_pcomplex_map(doc: dict) -> PComplexMap:
    source = load_pcomplex(_need(doc, "source", "map document"))
    target = load_pcomplex(_need(doc, "target", "map document"))
    comp_specs = _need(doc, "components", "map document")
    comps = []
    for r, spec in enumerate(comp_specs):
        cc = {}
        for key, rows in spec.items():
            k = int(key)
            cc[k] = load_matrix(rows, target.dim(r, k), source.dim(r, k),
                                f"component ({r},{k})")
        comps.append(cc)
    try:
        return PComplexMap(source, target, comps)
    except ValidationError as exc:
        raise ValidationError(f"map invalid: {exc}") from exc


# -- emission -----------------------------------------------------------------

def barcode_payload(bars, grid: Grid) -> list[dict]:
    out = []
    for b in sorted(bars, key=lambda b: (b.degree, b.birth,
                                         b.death == INF, b.death)):
        out.append({
            "degree": b.degree,
            "birth": _rational_str(grid.times[b.birth]),
            "death": None if b.death == INF else _rational_str(grid.times[int(b.death)]),
        })
    return out


def presentation_payload(model: TameMinimalModel) -> dict:
    pres = presentation(model)
    return {
        "generators": [{
            "name": e.name, "degree": e.degree,
            "birth": _rational_str(e.birth_time),
            "death": None if e.death_time is None else _rational_str(e.death_time),
            "differential": e.differential,
            "endpoint": e.endpoint,
        } for e in pres.entries],
        "text": pres.text(),
    }


def model_payload(model: TameMinimalModel, input_doc: dict) -> dict:
    """Self-contained serialization: the input tower plus the model data."""
    n = len(model.grid)
    gens = []
    for g in model.generators:
        gens.append({
            "name": g.name, "degree": g.degree, "birth": g.birth,
            "death": None if g.death == INF else int(g.death),
            "d": render_element(g.birth_differential),
            "endpoint": None if g.endpoint_image is None
            else render_element(g.endpoint_image),
        })
    stage_models = []
    for r in range(n):
        stage_models.append({
            name: render_element(img)
            for name, img in sorted(model.models[r].gen_images.items())})
    homos = []
    for r in range(n - 1):
        stage = {}
        for name in sorted(model.homotopies[r].assignment):
            iv = model.homotopies[r].assignment[name]
            stage[name] = {
                "poly": {str(k): render_element(v) for k, v in sorted(iv.poly.items())},
                "dt": {str(k): render_element(v) for k, v in sorted(iv.dt.items())},
            }
        homos.append(stage)
    return {
        "schema_version": SCHEMA_VERSION,
        "input": input_doc,
        "model": {"degree_cap": model.target.user_cap, "generators": gens,
                  "stage_models": stage_models, "homotopies": homos},
    }


def load_model(doc: dict) -> tuple[PersistentCDGA, TameMinimalModel]:
    """Rebuild a TameMinimalModel from its serialized form (and its input)."""
    target = load_input(_need(doc, "input", "model document"))
    spec = _need(doc, "model", "model document")
    n = len(target.grid)
    icap = target.internal_cap
    entries = _need(spec, "generators", "model")

    def alive(e, r):
        death = e["death"]
        return e["birth"] <= r and (death is None or r < death)

    algebras: list[FreeCDGA] = []
    sigmas: list[CdgaMorphism] = []
    prev = None
    for r in range(n):
        live = [e for e in entries if alive(e, r)]
        gens = [(e["name"], e["degree"]) for e in live]
        scratch = free_cdga(gens, {}, icap)
        d_terms = {}
        sigma_images_scratch = {}
        if r > 0:
            for e in entries:
                if not alive(e, r - 1):
                    continue
                if alive(e, r):
                    sigma_images_scratch[e["name"]] = scratch.gen(e["name"])
                else:
                    src = e.get("endpoint") or "0"
                    sigma_images_scratch[e["name"]] = parse_expression(src, scratch)
            bridge = CdgaMorphism.on_generators(prev, scratch, sigma_images_scratch)
        for e in live:
            if e["birth"] == r:
                d_terms[e["name"]] = parse_expression(str(e["d"]), scratch).terms
            else:
                pushed = bridge.apply(prev.generator_diff(e["name"]))
                d_terms[e["name"]] = pushed.terms
        try:
            alg = free_cdga(gens, d_terms, icap)
        except ValidationError as exc:
            raise ValidationError(f"model stage {r}: {exc}") from exc
        if r > 0:
            images = {name: CdgaElement(alg, el.terms)
                      for name, el in sigma_images_scratch.items()}
            sigmas.append(CdgaMorphism.on_generators(prev, alg, images))
        algebras.append(alg)
        prev = alg

    models = []
    for r, stage in enumerate(_need(spec, "stage_models", "model")):
        images = {name: parse_expression(str(src), target.stages[r])
                  for name, src in stage.items()}
        missing = {g.name for g in algebras[r].generators} - set(images)
        if missing:
            raise SchemaError(f"stage model {r} missing images for {sorted(missing)}")
        models.append(CdgaMorphism.on_generators(algebras[r], target.stages[r], images))

    homotopies = []
    for r, stage in enumerate(_need(spec, "homotopies", "model")):
        assignment = {}
        for name, parts in stage.items():
            cod = target.stages[r + 1]
            poly = {int(k): parse_expression(str(src), cod)
                    for k, src in parts.get("poly", {}).items()}
            dt = {int(k): parse_expression(str(src), cod)
                  for k, src in parts.get("dt", {}).items()}
            assignment[name] = IntervalElement(cod, poly, dt)
        missing = {g.name for g in algebras[r].generators} - set(assignment)
        if missing:
            raise SchemaError(f"homotopy {r} missing generators {sorted(missing)}")
        homotopies.append(CdgaHomotopy(algebras[r], target.stages[r + 1],
                                       assignment, check=False))

    model = TameMinimalModel.__new__(TameMinimalModel)
    model.target = target
    model.grid = target.grid
    model.degree_done = int(spec.get("degree_cap", target.user_cap))
    model.algebras = algebras
    model.sigmas = sigmas
    model.models = models
    model.homotopies = homotopies
    model.gen_records = []
    for e in entries:
        birth_alg = algebras[e["birth"]]
        v = parse_expression(str(e["d"]), birth_alg)
        u = None
        if e["death"] is not None:
            u = parse_expression(str(e.get("endpoint") or "0"), algebras[e["death"]])
        model.gen_records.append({
            "name": e["name"], "degree": e["degree"], "birth": e["birth"],
            "death": INF if e["death"] is None else e["death"], "v": v, "u": u})
    return target, model


def dump_json(payload, path: str):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_barcode(model: TameMinimalModel, path: str):
    dump_json(barcode_payload(homotopy_barcode(model).bars, model.grid), path)


def emit_presentation(model: TameMinimalModel, path: str, verbose: bool = False):
    with open(path, "w") as fh:
        fh.write(presentation(model).text(verbose=verbose))
        fh.write("\n")


def emit_report(report: dict, path: str):
    report = dict(report)
    report.setdefault("schema_version", SCHEMA_VERSION)
    dump_json(report, path)
