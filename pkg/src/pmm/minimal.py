"""Pointwise minimal models: approximation telescopes for CDGAs and maps.

A model is graded "k-minimal" here in the operational sense that the mapping
cone of the model map has vanishing cohomology through degree k; each step
kills the degree-k cone cohomology by a Hirsch extension whose generators
carry chosen cone cocycle representatives.  For maps, both sides extend at
once and the connecting homotopy extends by an explicit formula with a
correction term d(y (x) t) on kernel classes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cdga import (
    Algebra, CdgaMorphism, FreeCDGA, free_cdga, hirsch_extend,
    validate_morphism,
)
from .errors import InternalError, ValidationError
from .exactla import ONE, QMatrix, adapted_split, solve
from .homotopy import (
    CdgaHomotopy, HomotopySquare, IntervalElement, cone,
    cone_map, integrate_0t, interval_d,
)


@dataclass
class MinModel:
    """m: M -> A with M minimal and H^j(C_m) = 0 for all j <= k."""

    m: CdgaMorphism
    k: int

    @property
    def algebra(self) -> FreeCDGA:
        return self.m.domain

    @property
    def target(self) -> Algebra:
        return self.m.codomain


def unit_model(a: Algebra, degree_cap: Optional[int] = None) -> MinModel:
    """The 1-minimal model Q -> A of a simply-connected algebra."""
    if not a.is_simply_connected():
        raise ValidationError("target is not simply-connected (H^0 = Q, H^1 = 0 required)")
    cap = degree_cap if degree_cap is not None else a.degree_cap
    unit = free_cdga([], {}, cap)
    return MinModel(CdgaMorphism.on_generators(unit, a, {}), 1)


def check_minimality(algebra: FreeCDGA) -> None:
    """Every generator has degree >= 2 and a decomposable differential."""
    for g in algebra.generators:
        if g.degree < 2:
            raise InternalError(f"generator {g.name} has degree {g.degree} < 2")
        for mono in algebra.generator_diff(g.name).terms:
            if sum(mono) < 2:
                raise InternalError(f"d({g.name}) has an indecomposable term")


def check_connectivity(model: MinModel, through: int) -> None:
    c = cone(model.m)
    for j in range(0, through + 1):
        dim = c.h_dim(j)
        if dim:
            raise InternalError(f"cone cohomology nonzero in degree {j}: dim {dim}")


def telescope_step(model: MinModel, namer=None) -> MinModel:
    """Extend a (k-1)-minimal model to a k-minimal model of the same target."""
    k = model.k + 1
    c = cone(model.m)
    space = c.cohomology_space(k)
    names = namer or (lambda deg, i: f"x{deg}_{i}")
    new_gens = []
    images = []
    for i, rep in enumerate(space.reps):
        v, a = c.unpack(k, rep)
        new_gens.append((names(k, i), k, v))
        images.append(a)
    mbar_alg, _ = hirsch_extend(model.algebra, new_gens)
    gen_images = {g.name: model.m.gen_images[g.name] for g in model.algebra.generators}
    for (name, _, _), a in zip(new_gens, images):
        gen_images[name] = a
    mbar = CdgaMorphism.on_generators(mbar_alg, model.target, gen_images)
    problems = validate_morphism(mbar)
    if problems:
        raise InternalError(f"telescope extension is not a morphism: {problems}")
    out = MinModel(mbar, k)
    check_minimality(mbar_alg)
    if cone(mbar).h_dim(k):
        raise InternalError(f"degree-{k} cone cohomology survives the extension")
    return out


def build_min_model(a: Algebra, cap: int) -> MinModel:
    """Iterate the telescope from the unit model up to the degree cap.

    The target must have degree headroom: computing H^cap of the cone reads
    two degrees above, so a.degree_cap >= cap + 2 is required.
    """
    if a.degree_cap < cap + 2:
        raise ValidationError(
            f"target degree cap {a.degree_cap} too small for model cap {cap}; "
            f"need at least {cap + 2}")
    model = unit_model(a)
    for k in range(2, cap + 1):
        model = telescope_step(model)
    check_connectivity(model, cap)
    return model


@dataclass
class StepReport:
    """Verification data recorded by one map-model step."""

    degree: int
    psi: QMatrix                 # H^k(phi) in the chosen cohomology bases
    q_matrix: QMatrix            # Q^k(g) in the new-generator bases
    psi_adapted: QMatrix         # psi expressed in the adapted bases
    new_domain_gens: list[str]
    new_codomain_gens: list[str]


@dataclass
class MapModel:
    """k-minimal model of f: A -> B: a square commuting up to a homotopy."""

    g: CdgaMorphism              # M -> N
    m: CdgaMorphism              # M -> A
    n: CdgaMorphism              # N -> B
    f: CdgaMorphism              # A -> B
    homotopy: CdgaHomotopy       # from f o m to n o g
    k: int
    reports: list[StepReport] = field(default_factory=list)

    def square(self) -> HomotopySquare:
        return HomotopySquare(top=self.g, bottom=self.f, left=self.m,
                              right=self.n, homotopy=self.homotopy)


def trivial_map_model(f: CdgaMorphism, degree_cap: Optional[int] = None) -> MapModel:
    """The 1-minimal square Q -> Q over f between simply-connected algebras."""
    for label, alg in (("domain", f.domain), ("codomain", f.codomain)):
        if not alg.is_simply_connected():
            raise ValidationError(f"{label} is not simply-connected")
    cap = degree_cap if degree_cap is not None else f.domain.degree_cap
    unit_m = free_cdga([], {}, cap)
    unit_n = free_cdga([], {}, cap)
    g = CdgaMorphism.on_generators(unit_m, unit_n, {})
    m = CdgaMorphism.on_generators(unit_m, f.domain, {})
    n = CdgaMorphism.on_generators(unit_n, f.codomain, {})
    h = CdgaHomotopy(unit_m, f.codomain, {}, check=False)
    return MapModel(g=g, m=m, n=n, f=f, homotopy=h, k=1)


def _linear_part_matrix(gmap: CdgaMorphism, dom_names: list[str],
                        cod_names: list[str], k: int) -> QMatrix:
    """Q^k of a map of free algebras restricted to the named generators."""
    cod_alg: FreeCDGA = gmap.codomain  # type: ignore[assignment]
    rows = len(cod_names)
    cols = []
    pos = {name: i for i, name in enumerate(cod_names)}
    for name in dom_names:
        img = gmap.gen_images[name]
        col = [0] * rows
        for mono, c in img.terms.items():
            if sum(mono) == 1:
                gi = mono.index(1)
                gen = cod_alg.generators[gi]
                if gen.degree == k and gen.name in pos:
                    col[pos[gen.name]] = c
        cols.append(tuple(col))
    return QMatrix.from_columns(cols, rows)


def map_model_step(mm: MapModel, namer=None) -> MapModel:
    """One inductive extension of a map model, from degree k-1 to k.

    Bases of H^k of the two cones are adapted to psi = H^k(phi): coimage
    classes transport by phi, kernel classes bound by solving in the target
    cone, cokernel classes get fresh generators.  All four maps and the
    homotopy extend by the explicit assignments; the postconditions
    H^k C = 0 on both sides and Q^k(g) = psi are verified before returning.
    """
    k = mm.k + 1
    phi = cone_map(mm.square())
    c_m, c_n = phi.source, phi.target
    v_space = c_m.cohomology_space(k)
    w_space = c_n.cohomology_space(k)

    psi_cols = [w_space.class_of(phi.apply_vector(k, rep)) for rep in v_space.reps]
    psi = QMatrix.from_columns(psi_cols, w_space.dim)
    split = adapted_split(psi)

    names = namer or (lambda side, deg, i: f"{side}{deg}_{i}")

    # Domain-side data: coimage classes (eps) then kernel classes (alpha).
    dom_new = []       # (name, degree, d_image in M)
    m_images = []      # images under the extended model map
    g_targets = []     # None for eps_i (goes to the new codomain generator i)
    cone_reps = []     # packed cone cocycles, for transport / solving
    for h_coords in split.coimage + split.kernel:
        z = v_space.rep_of_class(h_coords)
        v, a = c_m.unpack(k, z)
        dom_new.append((None, k, v))
        m_images.append(a)
        cone_reps.append(z)

    r = split.rank
    solved = []
    for j in range(r, len(dom_new)):
        target_vec = phi.apply_vector(k, cone_reps[j])
        sol = solve(c_n.d_matrix(k - 1), target_vec)
        if sol is None:
            raise InternalError("kernel class is not bounded in the target cone")
        solved.append(c_n.unpack(k - 1, sol))  # (x_j, y_j)

    # Codomain-side data: transported images (psi eps) then cokernel (beta).
    cod_new = []
    n_images = []
    for i in range(r):
        z = cone_reps[i]
        v, a = c_m.unpack(k, z)
        gv = mm.g.apply(v)
        n_images.append(mm.f.apply(a) + mm.homotopy.integral_of(v))
        cod_new.append((None, k, gv))
    for h_coords in split.cokernel:
        w, b = c_n.unpack(k, w_space.rep_of_class(h_coords))
        cod_new.append((None, k, w))
        n_images.append(b)

    dom_names = [names("x", k, i) for i in range(len(dom_new))]
    cod_names = [names("y", k, i) for i in range(len(cod_new))]
    dom_new = [(nm, deg, v) for nm, (_, deg, v) in zip(dom_names, dom_new)]
    cod_new = [(nm, deg, w) for nm, (_, deg, w) in zip(cod_names, cod_new)]

    mbar_alg, _ = hirsch_extend(mm.m.domain, dom_new)
    nbar_alg, _ = hirsch_extend(mm.n.domain, cod_new)

    old_m: FreeCDGA = mm.m.domain  # type: ignore[assignment]
    old_n: FreeCDGA = mm.n.domain  # type: ignore[assignment]

    gbar_images = {g.name: old_n.embed_terms(mm.g.gen_images[g.name], nbar_alg)
                   for g in old_m.generators}
    for i in range(r):
        gbar_images[dom_names[i]] = nbar_alg.gen(cod_names[i])
    for j, (x_j, _) in enumerate(solved):
        gbar_images[dom_names[r + j]] = old_n.embed_terms(x_j, nbar_alg)
    gbar = CdgaMorphism.on_generators(mbar_alg, nbar_alg, gbar_images)

    mbar_images = {g.name: mm.m.gen_images[g.name] for g in old_m.generators}
    for nm, a in zip(dom_names, m_images):
        mbar_images[nm] = a
    mbar = CdgaMorphism.on_generators(mbar_alg, mm.m.codomain, mbar_images)

    nbar_images = {g.name: mm.n.gen_images[g.name] for g in old_n.generators}
    for nm, b in zip(cod_names, n_images):
        nbar_images[nm] = b
    nbar = CdgaMorphism.on_generators(nbar_alg, mm.n.codomain, nbar_images)

    h_assign = {g.name: mm.homotopy.assignment[g.name] for g in old_m.generators}
    for i in range(len(dom_new)):
        v = dom_new[i][2]
        base = IntervalElement.constant(mm.f.apply(m_images[i])) \
            + integrate_0t(mm.homotopy.apply(v))
        if i >= r:
            y_j = solved[i - r][1]
            base = base + interval_d(IntervalElement.t_power(y_j, 1))
        h_assign[dom_names[i]] = base
    hbar = CdgaHomotopy(mbar_alg, mm.f.codomain, h_assign)

    for label, mor in (("g", gbar), ("m", mbar), ("n", nbar)):
        problems = validate_morphism(mor)
        if problems:
            raise InternalError(f"extended {label} is not a morphism: {problems}")
    e0, e1 = hbar.endpoints()
    for g in mbar_alg.generators:
        a = mbar_alg.gen(g.name)
        if e0.apply(a) != mm.f.apply(mbar.apply(a)):
            raise InternalError("extended homotopy start is not f o m")
        if e1.apply(a) != nbar.apply(gbar.apply(a)):
            raise InternalError("extended homotopy end is not n o g")

    new_mm = MapModel(g=gbar, m=mbar, n=nbar, f=mm.f, homotopy=hbar, k=k,
                      reports=list(mm.reports))

    if cone(mbar).h_dim(k) or cone(nbar).h_dim(k):
        raise InternalError(f"degree-{k} cone cohomology survives the map extension")
    check_minimality(mbar_alg)
    check_minimality(nbar_alg)

    q = _linear_part_matrix(gbar, dom_names, cod_names, k)
    expected = QMatrix(len(cod_new), len(dom_new),
                       [[ONE if (i == j and i < r) else 0
                         for j in range(len(dom_new))] for i in range(len(cod_new))])
    if q != expected:
        raise InternalError("Q^k of the extended map differs from H^k(phi)")
    psi_adapted = (split.codomain_change_inv @ psi @ split.domain_change
                   if psi.rows and psi.cols else psi)
    new_mm.reports.append(StepReport(
        degree=k, psi=psi, q_matrix=q, psi_adapted=psi_adapted,
        new_domain_gens=dom_names, new_codomain_gens=cod_names))
    return new_mm


def build_map_model(f: CdgaMorphism, cap: int) -> MapModel:
    """Approximation telescope of a map, from the trivial square to degree cap."""
    for alg in (f.domain, f.codomain):
        if alg.degree_cap < cap + 2:
            raise ValidationError(
                f"degree cap {alg.degree_cap} too small for model cap {cap}; "
                f"need at least {cap + 2}")
    mm = trivial_map_model(f)
    for k in range(2, cap + 1):
        mm = map_model_step(mm)
    return mm
