"""Persistent minimal models of tame persistent CDGAs.

The builder sweeps degrees 2..cap.  At degree k it assembles the tame cone
(stage mapping cones glued by the atomic homotopies), decomposes its k-th
cohomology into interval summands with exactly-propagated sections, and
attaches one persistent generator per bar: the section's cone cocycle gives
the birth differential and the stage model values; at a finite death the
propagated cocycle is bounded by a deterministic solve whose two components
become the endpoint image and the homotopy correction term.

Stage algebras carry an internal degree cap two above the requested cap:
degree-cap surgery reads cone cocycles one degree up, whose cocycle
condition reads one degree further.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cdga import (
    Algebra, CdgaElement, CdgaMorphism, FreeCDGA, Monomial, differential,
    free_cdga, validate_morphism,
)
from .errors import InternalError, ValidationError
from .exactla import QMatrix, solve
from .homotopy import (
    CdgaHomotopy, ConeComplex, ConeMap, HomotopySquare, IntervalElement,
    check_homotopy_identity, cone, integrate_0t, interval_d,
)
from .minimal import check_minimality
from .persistence import INF, Bar, Grid, PersistenceModule, interval_decompose
from .pcomplex import PersistentComplex

INTERNAL_HEADROOM = 2


class PersistentCDGA:
    """Strict tame diagram of simply-connected CDGAs over a grid."""

    def __init__(self, grid: Grid, stages: Sequence[Algebra],
                 maps: Sequence[CdgaMorphism], user_cap: int, check: bool = True):
        self.grid = grid
        self.stages = tuple(stages)
        self.maps = tuple(maps)
        self.user_cap = user_cap
        if len(self.stages) != len(grid):
            raise ValidationError("need one stage algebra per grid time")
        if len(self.maps) != len(grid) - 1:
            raise ValidationError("need one structure map per consecutive pair")
        if check:
            self.validate()

    @property
    def internal_cap(self) -> int:
        return self.user_cap + INTERNAL_HEADROOM

    def validate(self):
        for r, alg in enumerate(self.stages):
            if alg.degree_cap < self.internal_cap:
                raise ValidationError(
                    f"stage {r} algebra cap {alg.degree_cap} below required "
                    f"{self.internal_cap} (user cap + {INTERNAL_HEADROOM})")
            if not alg.is_simply_connected():
                raise ValidationError(f"stage {r} is not simply-connected")
        for r, f in enumerate(self.maps):
            if f.domain is not self.stages[r] or f.codomain is not self.stages[r + 1]:
                raise ValidationError(f"map {r} does not connect stages {r},{r + 1}")
            problems = validate_morphism(f)
            if problems:
                raise ValidationError(f"stage map {r} invalid: {problems}")

    def insert_duplicate_stage(self, index: int, time) -> "PersistentCDGA":
        """Refine the grid by repeating stage `index` with an identity map."""
        new_grid = self.grid.insert(index + 1, time)
        stages = list(self.stages)
        stages.insert(index + 1, self.stages[index])
        maps = list(self.maps)
        maps.insert(index, CdgaMorphism.identity(self.stages[index]))
        return PersistentCDGA(new_grid, stages, maps, self.user_cap, check=False)


@dataclass
class PersistentGenerator:
    """One cell of the persistent model: lifespan plus attaching data."""

    name: str
    degree: int
    birth: int
    death: float                      # grid index or INF
    birth_differential: CdgaElement   # over the model stage algebra at birth
    endpoint_image: Optional[CdgaElement]  # over the stage algebra at death

    def bar(self) -> Bar:
        return Bar(self.birth, self.death, self.degree)


class TameMinimalModel:
    """Stagewise minimal models with atomic homotopies between stages."""

    def __init__(self, target: PersistentCDGA):
        n = len(target.grid)
        cap = target.internal_cap
        self.target = target
        self.grid = target.grid
        self.degree_done = 1
        self.gen_records: list[dict] = []
        self.algebras: list[FreeCDGA] = [free_cdga([], {}, cap) for _ in range(n)]
        self.sigmas: list[CdgaMorphism] = [
            CdgaMorphism.on_generators(self.algebras[r], self.algebras[r + 1], {})
            for r in range(n - 1)]
        self.models: list[CdgaMorphism] = [
            CdgaMorphism.on_generators(self.algebras[r], target.stages[r], {})
            for r in range(n)]
        self.homotopies: list[CdgaHomotopy] = [
            CdgaHomotopy(self.algebras[r], target.stages[r + 1], {}, check=False)
            for r in range(n - 1)]

    # -- derived views -------------------------------------------------------

    @property
    def generators(self) -> list[PersistentGenerator]:
        out = []
        for rec in self.gen_records:
            v = rec["v"]
            v_bound = v.algebra.embed_terms(v, self.algebras[rec["birth"]])
            u_bound = None
            if rec["u"] is not None:
                u = rec["u"]
                u_bound = u.algebra.embed_terms(u, self.algebras[int(rec["death"])])
            out.append(PersistentGenerator(
                name=rec["name"], degree=rec["degree"], birth=rec["birth"],
                death=rec["death"], birth_differential=v_bound,
                endpoint_image=u_bound))
        return out

    def pushforward(self, elem: CdgaElement, r_from: int, r_to: int) -> CdgaElement:
        out = elem
        for r in range(r_from, r_to):
            out = self.sigmas[r].apply(out)
        return out

    def stage_cones(self) -> list[ConeComplex]:
        return [cone(m) for m in self.models]

    def stage_squares(self) -> list[HomotopySquare]:
        return [HomotopySquare(top=self.sigmas[r], bottom=self.target.maps[r],
                               left=self.models[r], right=self.models[r + 1],
                               homotopy=self.homotopies[r])
                for r in range(len(self.grid) - 1)]


def tame_cone(model: TameMinimalModel) -> tuple[PersistentComplex, list[ConeComplex]]:
    """The persistent complex of stage cones glued by the homotopy cone maps.

    Returns the complex together with the per-stage ConeComplex objects whose
    packing order defines the complex's coordinates (degree -1 is dropped in
    the persistent rendering; stage cones keep it for honest H^0).
    """
    n = len(model.grid)
    cones = model.stage_cones()
    maps = [ConeMap(sq) for sq in model.stage_squares()]
    max_degree = model.target.internal_cap - 1
    labels = []
    for r in range(n):
        stage = []
        for deg in range(max_degree + 1):
            dom = model.algebras[r]
            tgt = model.target.stages[r]
            stage.append([f"M:{dom.key_repr(key)}" for key in dom.basis_keys(deg + 1)]
                         + [f"A:{tgt.key_repr(key)}" for key in tgt.basis_keys(deg)])
        labels.append(stage)
    d = [{deg: cones[r].d_matrix(deg) for deg in range(max_degree + 1)}
         for r in range(n)]
    sigma = [{deg: maps[r].matrix(deg) for deg in range(max_degree + 1)}
             for r in range(n - 1)]
    return PersistentComplex(model.grid, max_degree, labels, d, sigma), cones


def surgery_step(model: TameMinimalModel, k: int) -> TameMinimalModel:
    """Attach one persistent generator per bar of H^k of the tame cone."""
    if k != model.degree_done + 1:
        raise ValidationError(f"surgery degree {k} out of order "
                              f"(done through {model.degree_done})")
    n = len(model.grid)
    target = model.target
    tc, cones = tame_cone(model)
    spaces = [tc.cohomology_space(r, k) for r in range(n)]
    dims = tuple(sp.dim for sp in spaces)
    hmaps = tuple(QMatrix.from_columns(
        [spaces[r + 1].class_of(tc.sigma_mat(r, k).apply(rep))
         for rep in spaces[r].reps], dims[r + 1]) for r in range(n - 1))
    module = PersistenceModule(model.grid, dims, hmaps)
    bars, reps = interval_decompose(module)

    order = sorted(range(len(bars)), key=lambda i: (
        bars[i].birth, bars[i].death == INF, bars[i].death,
        tuple(reps[i].vectors[bars[i].birth])))

    existing = sum(1 for rec in model.gen_records if rec["degree"] == k)
    new_records = []
    for counter, idx in enumerate(order):
        bar, rep = bars[idx], reps[idx]
        p = bar.birth
        q = bar.death
        last = n - 1 if q == INF else int(q) - 1
        z = {p: spaces[p].rep_of_class(rep.vectors[p])}
        for r in range(p, last):
            z[r + 1] = tc.sigma_mat(r, k).apply(z[r])
            if spaces[r + 1].class_of(z[r + 1]) != rep.vectors[r + 1]:
                raise InternalError("propagated cocycle leaves its bar class")
        sections = {}
        for r in range(p, last + 1):
            v_elem, a_elem = cones[r].unpack(k, z[r])
            sections[r] = (v_elem, a_elem)
        u_elem = None
        b_elem = None
        if q != INF:
            pushed = tc.sigma_mat(int(q) - 1, k).apply(z[int(q) - 1])
            sol = solve(cones[int(q)].d_matrix(k - 1), pushed)
            if sol is None:
                raise InternalError("dead bar class fails to bound at its death")
            u_elem, b_elem = cones[int(q)].unpack(k - 1, sol)
        new_records.append({
            "name": f"x{k}_{existing + counter}", "degree": k,
            "birth": p, "death": q, "v": sections[p][0], "u": u_elem,
            "b": b_elem, "sections": sections,
        })

    out = _extend_state(model, k, new_records)
    _verify_surgery(out, k, new_records)
    return out


def _extend_state(model: TameMinimalModel, k: int,
                  new_records: list[dict]) -> TameMinimalModel:
    n = len(model.grid)
    target = model.target
    cap = target.internal_cap

    def alive(rec, r):
        return rec["birth"] <= r and (rec["death"] == INF or r < rec["death"])

    out = TameMinimalModel.__new__(TameMinimalModel)
    out.target = target
    out.grid = model.grid
    out.degree_done = k
    out.gen_records = model.gen_records + [
        {key: rec[key] for key in ("name", "degree", "birth", "death", "v", "u")}
        for rec in new_records]

    old_algs = model.algebras
    new_algs: list[FreeCDGA] = []
    for r in range(n):
        gens = [(g.name, g.degree) for g in old_algs[r].generators]
        diffs: dict[str, dict[Monomial, Fraction]] = {}
        added = [rec for rec in new_records if alive(rec, r)]
        old_len = len(gens)
        new_len = old_len + len(added)

        def widen(terms):
            return {mono + (0,) * (new_len - len(mono)): c for mono, c in terms.items()}

        for g in old_algs[r].generators:
            diffs[g.name] = widen(old_algs[r].generator_diff(g.name).terms)
        for rec in added:
            gens.append((rec["name"], k))
            diffs[rec["name"]] = widen(rec["sections"][r][0].terms)
        new_algs.append(free_cdga(gens, diffs, cap))
    out.algebras = new_algs

    sigmas = []
    for r in range(n - 1):
        images = {}
        for g in old_algs[r].generators:
            img = model.sigmas[r].gen_images[g.name]
            images[g.name] = old_algs[r + 1].embed_terms(img, new_algs[r + 1])
        for rec in new_records:
            if not alive(rec, r):
                continue
            if alive(rec, r + 1):
                images[rec["name"]] = new_algs[r + 1].gen(rec["name"])
            else:
                u = rec["u"]
                images[rec["name"]] = u.algebra.embed_terms(u, new_algs[r + 1])
        sigmas.append(CdgaMorphism.on_generators(new_algs[r], new_algs[r + 1], images))
    out.sigmas = sigmas

    models = []
    for r in range(n):
        images = {g.name: model.models[r].gen_images[g.name]
                  for g in old_algs[r].generators}
        for rec in new_records:
            if alive(rec, r):
                images[rec["name"]] = rec["sections"][r][1]
        models.append(CdgaMorphism.on_generators(new_algs[r], target.stages[r], images))
    out.models = models

    homotopies = []
    for r in range(n - 1):
        assignment = dict(model.homotopies[r].assignment)
        for rec in new_records:
            if not alive(rec, r):
                continue
            v_elem, a_elem = rec["sections"][r]
            base = IntervalElement.constant(target.maps[r].apply(a_elem)) \
                + integrate_0t(model.homotopies[r].apply(v_elem))
            if not alive(rec, r + 1):
                base = base + interval_d(IntervalElement.t_power(rec["b"], 1))
            assignment[rec["name"]] = base
        homotopies.append(CdgaHomotopy(new_algs[r], target.stages[r + 1], assignment))
    out.homotopies = homotopies
    return out


def _verify_surgery(model: TameMinimalModel, k: int, new_records: list[dict]):
    n = len(model.grid)
    for r in range(n):
        problems = validate_morphism(model.models[r])
        if problems:
            raise InternalError(f"stage model {r} invalid after surgery: {problems}")
        check_minimality(model.algebras[r])
    for r in range(n - 1):
        problems = validate_morphism(model.sigmas[r])
        if problems:
            raise InternalError(f"structure map {r} invalid after surgery: {problems}")
        _check_homotopy_square(model, r, only_names={rec["name"] for rec in new_records})
    for r in range(n):
        c = cone(model.models[r])
        for j in range(0, k + 1):
            if c.h_dim(j):
                raise InternalError(
                    f"cone cohomology H^{j} nonzero at stage {r} after degree-{k} surgery")


def _check_homotopy_square(model: TameMinimalModel, r: int,
                           only_names: Optional[set] = None):
    """Endpoints and the integration identity for the stage-r homotopy."""
    h = model.homotopies[r]
    e0, e1 = h.endpoints()
    f_composite = {g.name: model.target.maps[r].apply(model.models[r].gen_images[g.name])
                   for g in model.algebras[r].generators}
    g_composite = {g.name: model.models[r + 1].apply(model.sigmas[r].gen_images[g.name])
                   for g in model.algebras[r].generators}
    for g in model.algebras[r].generators:
        if e0.gen_images[g.name] != f_composite[g.name]:
            raise InternalError(f"homotopy start mismatch on {g.name} at stage {r}")
        if e1.gen_images[g.name] != g_composite[g.name]:
            raise InternalError(f"homotopy end mismatch on {g.name} at stage {r}")
    names = only_names if only_names is not None else \
        {g.name for g in model.algebras[r].generators}
    for name in names:
        if name not in h.assignment:
            continue
        a = model.algebras[r].gen(name)
        lhs = differential(h.integral_of(a)) + h.integral_of(differential(a))
        rhs = e1.apply(a) - e0.apply(a)
        if lhs != rhs:
            raise InternalError(f"integration identity fails on {name} at stage {r}")


def build_persistent_minimal_model(a: PersistentCDGA, cap: Optional[int] = None
                                   ) -> TameMinimalModel:
    """Run interval surgery for every degree 2..cap from the trivial model."""
    cap = cap if cap is not None else a.user_cap
    if cap > a.user_cap:
        raise ValidationError("requested cap exceeds the input's declared cap")
    model = TameMinimalModel(a)
    for k in range(2, cap + 1):
        model = surgery_step(model, k)
    return model


@dataclass
class PresentationEntry:
    name: str
    degree: int
    birth_time: Fraction
    death_time: Optional[Fraction]     # None encodes infinity
    differential: str                  # rendered expression at the birth stage
    endpoint: Optional[str]            # rendered expression at the death stage


@dataclass
class Presentation:
    entries: list[PresentationEntry]

    def text(self, verbose: bool = False) -> str:
        gens = []
        rels = []
        for e in self.entries:
            death = "inf" if e.death_time is None else str(e.death_time)
            gens.append(f"{e.name} : deg {e.degree} on [{e.birth_time},{death})")
            if verbose or e.differential != "0":
                rels.append(f"d {e.name} = {e.differential}")
            if e.endpoint is not None and (verbose or e.endpoint != "0"):
                rels.append(f"{e.name}@{death} = {e.endpoint}")
        body = " ; ".join(gens)
        if rels:
            return f"pΛ( {body} | {' ; '.join(rels)} )"
        return f"pΛ( {body} )"


def presentation(model: TameMinimalModel) -> Presentation:
    from .expressions import render_element

    entries = []
    gens = sorted(model.generators, key=lambda g: (g.degree, g.birth, g.name))
    for g in gens:
        death_time = None if g.death == INF else model.grid.times[int(g.death)]
        endpoint = None
        if g.endpoint_image is not None:
            endpoint = render_element(g.endpoint_image)
        entries.append(PresentationEntry(
            name=g.name, degree=g.degree, birth_time=model.grid.times[g.birth],
            death_time=death_time, differential=render_element(g.birth_differential),
            endpoint=endpoint))
    return Presentation(entries)


@dataclass
class PiBarcode:
    bars: list[Bar]

    def as_multiset(self):
        return sorted((b.degree, b.birth, b.death) for b in self.bars)


def homotopy_barcode(model: TameMinimalModel) -> PiBarcode:
    """One bar per persistent generator: the homotopy-group barcode."""
    bars = [g.bar() for g in sorted(model.generators,
                                    key=lambda g: (g.degree, g.birth, g.name))]
    return PiBarcode(bars)


def indecomposables_module(model: TameMinimalModel, k: int) -> PersistenceModule:
    """Q^k of the model as a persistence module (independent of the barcode)."""
    n = len(model.grid)
    gens_at = [[g for g in model.algebras[r].generators if g.degree == k]
               for r in range(n)]
    dims = tuple(len(gs) for gs in gens_at)
    maps = []
    for r in range(n - 1):
        pos = {g.name: i for i, g in enumerate(gens_at[r + 1])}
        cols = []
        for g in gens_at[r]:
            img = model.sigmas[r].gen_images[g.name]
            col = [Fraction(0)] * dims[r + 1]
            for mono, c in img.terms.items():
                if sum(mono) == 1:
                    gname = model.algebras[r + 1].generators[mono.index(1)].name
                    if gname in pos:
                        col[pos[gname]] = c
            cols.append(tuple(col))
        maps.append(QMatrix.from_columns(cols, dims[r + 1]))
    return PersistenceModule(model.grid, dims, tuple(maps))


def validate_model(model: TameMinimalModel,
                   against: Optional[PersistentCDGA] = None) -> dict:
    """Machine-readable pass/fail per invariant class."""
    target = against if against is not None else model.target
    n = len(model.grid)
    cap = target.user_cap
    report: dict = {"schema_version": 1}

    failures = []
    try:
        for r in range(n):
            check_minimality(model.algebras[r])
    except InternalError as exc:
        failures.append(str(exc))
    report["minimality"] = {"status": "pass" if not failures else "fail",
                            "failures": failures}

    failures = []
    for r in range(n):
        c = cone(model.models[r])
        for j in range(0, cap + 1):
            dim = c.h_dim(j)
            if dim:
                failures.append(f"H^{j} C_m({r}) has dimension {dim}")
    report["connectivity"] = {"status": "pass" if not failures else "fail",
                              "checked_through_degree": cap, "failures": failures}

    failures = []
    for r in range(n - 1):
        try:
            model.homotopies[r].check_chain_condition()
            _check_homotopy_square(model, r)
            problems = check_homotopy_identity(model.homotopies[r], cap)
            failures.extend(f"stage {r}: {p}" for p in problems)
        except (InternalError, ValidationError) as exc:
            failures.append(f"stage {r}: {exc}")
    report["homotopy_identities"] = "pass" if not failures else \
        {"status": "fail", "failures": failures}

    failures = []
    for g in model.generators:
        if g.death == INF:
            continue
        pushed = model.pushforward(g.birth_differential, g.birth, int(g.death))
        du = differential(g.endpoint_image)
        if du != pushed:
            failures.append(f"endpoint law fails for {g.name}")
    report["endpoint_law"] = "pass" if not failures else \
        {"status": "fail", "failures": failures}

    certs = []
    all_ok = True
    by_degree: dict[int, list[PersistentGenerator]] = {}
    for g in model.generators:
        by_degree.setdefault(g.degree, []).append(g)
    for k in sorted(by_degree):
        problems = _hirsch_certificate_problems(model, k, by_degree[k])
        all_ok = all_ok and not problems
        certs.append({
            "degree": k,
            "generators": [{"name": g.name,
                            "birth": str(model.grid.times[g.birth]),
                            "death": None if g.death == INF
                            else str(model.grid.times[int(g.death)])}
                           for g in by_degree[k]],
            "status": "pass" if not problems else "fail",
            "failures": problems,
        })
    report["hirsch_certificates"] = certs

    failures = []
    for r in range(n):
        problems = validate_morphism(model.models[r])
        failures.extend(f"m({r}): {p}" for p in problems)
        if model.models[r].codomain is not target.stages[r]:
            failures.append(f"m({r}) does not land in the given target")
    for r in range(n - 1):
        problems = validate_morphism(model.sigmas[r])
        failures.extend(f"sigma({r}): {p}" for p in problems)
    report["structure"] = {"status": "pass" if not failures else "fail",
                           "failures": failures}

    def passed(entry):
        return entry == "pass" or (isinstance(entry, dict)
                                   and entry.get("status") == "pass")

    report["ok"] = all(passed(report[key]) for key in (
        "minimality", "connectivity", "homotopy_identities",
        "endpoint_law", "structure")) and all_ok
    return report


def _hirsch_certificate_problems(model: TameMinimalModel, k: int,
                                 gens: list[PersistentGenerator]) -> list[str]:
    """Re-derive the degree-k layer from the attaching data and compare.

    Checks that each stage algebra's degree-k generator set matches the
    lifespans, that differentials are the pushed birth differentials, and
    that structure maps act by survival or by the endpoint image.
    """
    n = len(model.grid)
    problems = []
    for r in range(n):
        expect = sorted(g.name for g in gens if g.birth <= r and
                        (g.death == INF or r < g.death))
        got = sorted(g.name for g in model.algebras[r].generators if g.degree == k)
        if expect != got:
            problems.append(f"stage {r}: degree-{k} generators {got}, expected {expect}")
    for g in gens:
        last = n - 1 if g.death == INF else int(g.death) - 1
        expected_d = g.birth_differential
        for r in range(g.birth, last + 1):
            actual = model.algebras[r].generator_diff(g.name)
            if actual.terms != expected_d.terms:
                problems.append(f"{g.name}: differential at stage {r} is not "
                                "the pushed birth differential")
                break
            if r < last:
                expected_d = model.sigmas[r].apply(expected_d)
        for r in range(g.birth, last):
            img = model.sigmas[r].gen_images[g.name]
            if img != model.algebras[r + 1].gen(g.name):
                problems.append(f"{g.name}: does not survive stage {r} by identity")
        if g.death != INF:
            img = model.sigmas[int(g.death) - 1].gen_images[g.name]
            if img.terms != g.endpoint_image.terms:
                problems.append(f"{g.name}: structure map at death is not the "
                                "endpoint image")
    return problems
