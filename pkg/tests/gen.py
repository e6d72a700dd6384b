"""Seeded random generators shared by the property and acceptance suites."""
from __future__ import annotations

from fractions import Fraction

from pmm.cdga import CdgaElement, CdgaMorphism, free_cdga, hirsch_extend
from pmm.exactla import QMatrix, kernel_basis, vec_add, vec_scale, zero_vec


def random_cocycle(rng, algebra, degree, density=0.8):
    """Random small-coefficient cocycle of the given degree (possibly zero)."""
    dim = algebra.dim(degree)
    if dim == 0:
        return algebra.zero()
    basis = kernel_basis(algebra.d_matrix(degree))
    acc = zero_vec(dim)
    for v in basis:
        if rng.random() < density:
            c = rng.randint(-2, 2)
            if c:
                acc = vec_add(acc, vec_scale(Fraction(c), v))
    return algebra.from_vector(degree, acc)


def random_free_cdga(rng, cap, max_gens=3, max_degree=5, prefix="g"):
    """Random simply-connected Sullivan algebra built by Hirsch extensions."""
    current = free_cdga([], {}, cap)
    for i in range(rng.randint(1, max_gens)):
        deg = rng.randint(2, max_degree)
        z = random_cocycle(rng, current, deg + 1)
        current, _ = hirsch_extend(current, [(f"{prefix}{i}", deg, z)])
    return current


def random_morphism(rng, cap, max_gens=3, max_degree=5):
    """Random CDGA map f: A -> B between random simply-connected algebras.

    A and f are grown together: each new generator's differential is sampled
    from the cocycles of A whose image under f is exact in B, so a valid
    image always exists.
    """
    b = random_free_cdga(rng, cap, max_gens, max_degree, prefix="b")
    return random_morphism_into(rng, b, cap, max_gens, max_degree)


def random_morphism_into(rng, b, cap, max_gens=3, max_degree=5, prefix="a"):
    """Random CDGA map into a fixed codomain, built jointly with its domain."""
    a = free_cdga([], {}, cap)
    images: dict[str, CdgaElement] = {}
    for i in range(rng.randint(1, max_gens)):
        deg = rng.randint(2, max_degree)
        f = CdgaMorphism.on_generators(a, b, images)
        z_basis = kernel_basis(a.d_matrix(deg + 1))
        fz_cols = [b.to_vector(f.apply(a.from_vector(deg + 1, z)), deg + 1)
                   for z in z_basis]
        d_cols = b.d_matrix(deg).columns()
        n_rows = b.dim(deg + 1)
        joint = QMatrix.from_columns(
            [tuple(c) for c in fz_cols] + [vec_scale(Fraction(-1), c) for c in d_cols],
            n_rows)
        pairs = kernel_basis(joint)
        v_coords = zero_vec(len(z_basis))
        x_coords = zero_vec(b.dim(deg))
        for p in pairs:
            if rng.random() < 0.85:
                c = rng.randint(-2, 2)
                if c:
                    v_coords = vec_add(v_coords, vec_scale(Fraction(c), p[:len(z_basis)]))
                    x_coords = vec_add(x_coords, vec_scale(Fraction(c), p[len(z_basis):]))
        dv = zero_vec(a.dim(deg + 1))
        for c, z in zip(v_coords, z_basis):
            if c:
                dv = vec_add(dv, vec_scale(c, z))
        d_elem = a.from_vector(deg + 1, dv) if a.dim(deg + 1) else a.zero()
        name = f"{prefix}{i}"
        a, _ = hirsch_extend(a, [(name, deg, d_elem)])
        images[name] = b.from_vector(deg, x_coords) if b.dim(deg) else b.zero()
    return CdgaMorphism.on_generators(a, b, images)


def random_tower(rng, user_cap, n_stages=3, max_gens=2, max_degree=4):
    """Random strict tower of simply-connected free CDGAs with valid maps.

    Built right to left: the last stage is random, then each earlier stage
    is grown jointly with its structure map into the next.
    """
    from pmm.persistence import Grid
    from pmm.pminimal import PersistentCDGA

    cap = user_cap + 2
    stages = [random_free_cdga(rng, cap, max_gens, max_degree, prefix=f"s{n_stages - 1}_")]
    maps = []
    for r in range(n_stages - 2, -1, -1):
        f = random_morphism_into(rng, stages[0], cap, max_gens, max_degree,
                                 prefix=f"s{r}_")
        stages.insert(0, f.domain)
        maps.insert(0, f)
    return PersistentCDGA(Grid(tuple(range(n_stages))), stages, maps, user_cap)


def random_pcomplex(rng, grid, max_degree, cells=4):
    """Random tame complex built by attaching random cells to zero."""
    from pmm.pcomplex import SphereMapData, attach_cell, zero_complex
    from pmm.persistence import INF

    x = zero_complex(grid, max_degree)
    n = len(grid)
    for idx in range(rng.randint(max(1, cells // 2), cells)):
        k = rng.randint(1, max_degree)
        s = rng.randint(0, n - 1)
        death_options = [INF] + [t for t in range(s + 1, n)]
        t = rng.choice(death_options)
        data = random_sphere_data(rng, x, k, s, t, label=f"c{idx}")
        if data is None:
            continue
        x = attach_cell(x, data, label=f"c{idx}")
    return x


def random_sphere_data(rng, x, k, s, t, label="c"):
    """Random element of Hom(S^k_[s,t), X), or None if the space is zero."""
    from pmm.pcomplex import SphereMapData, hom_from_sphere

    dim, basis = hom_from_sphere(x, k, s, t)
    coc = zero_vec(x.dim(s, k))
    bnd = None if t == float("inf") else zero_vec(x.dim(int(t), k - 1))
    for b in basis:
        c = rng.randint(-2, 2)
        if c and rng.random() < 0.6:
            coc = vec_add(coc, vec_scale(Fraction(c), b.cocycle))
            if bnd is not None:
                bnd = vec_add(bnd, vec_scale(Fraction(c), b.bounding))
    return SphereMapData(k, s, t, coc, bnd, label=label)


def random_pcomplex_map(rng, x, y):
    """Random map of persistent complexes, sampled from the solution space
    of the full naturality constraint system."""
    from pmm.pcomplex import PComplexMap

    n = len(x.grid)
    md = x.max_degree
    slots = [(r, k) for r in range(n) for k in range(md + 1)]
    offsets = {}
    total = 0
    for (r, k) in slots:
        offsets[(r, k)] = total
        total += y.dim(r, k) * x.dim(r, k)

    def entry_index(r, k, i, j):
        return offsets[(r, k)] + i * x.dim(r, k) + j

    rows = []

    def add_constraint(coeffs):
        row = [Fraction(0)] * total
        for idx, c in coeffs:
            row[idx] += c
        if any(v != 0 for v in row):
            rows.append(row)

    for r in range(n):
        for k in range(md):
            dy = y.d_mat(r, k)
            dx = x.d_mat(r, k)
            for i in range(y.dim(r, k + 1)):
                for j in range(x.dim(r, k)):
                    coeffs = []
                    for a in range(y.dim(r, k)):
                        if dy.entry(i, a):
                            coeffs.append((entry_index(r, k, a, j), dy.entry(i, a)))
                    for b in range(x.dim(r, k + 1)):
                        if dx.entry(b, j):
                            coeffs.append((entry_index(r, k + 1, i, b), -dx.entry(b, j)))
                    add_constraint(coeffs)
    for r in range(n - 1):
        for k in range(md + 1):
            sy = y.sigma_mat(r, k)
            sx = x.sigma_mat(r, k)
            for i in range(y.dim(r + 1, k)):
                for j in range(x.dim(r, k)):
                    coeffs = []
                    for a in range(y.dim(r, k)):
                        if sy.entry(i, a):
                            coeffs.append((entry_index(r, k, a, j), sy.entry(i, a)))
                    for b in range(x.dim(r + 1, k)):
                        if sx.entry(b, j):
                            coeffs.append((entry_index(r + 1, k, i, b), -sx.entry(b, j)))
                    add_constraint(coeffs)

    if total == 0:
        comps = [{k: QMatrix.zero(y.dim(r, k), x.dim(r, k)) for k in range(md + 1)}
                 for r in range(n)]
        return PComplexMap(x, y, comps)
    system = QMatrix(len(rows), total, rows) if rows else QMatrix.zero(0, total)
    sols = kernel_basis(system)
    flat = zero_vec(total)
    for v in sols:
        c = rng.randint(-3, 3)
        if c and rng.random() < 0.9:
            flat = vec_add(flat, vec_scale(Fraction(c), v))
    comps = []
    for r in range(n):
        stage = {}
        for k in range(md + 1):
            rows_m = y.dim(r, k)
            cols_m = x.dim(r, k)
            stage[k] = QMatrix(rows_m, cols_m,
                               [[flat[entry_index(r, k, i, j)] for j in range(cols_m)]
                                for i in range(rows_m)])
        comps.append(stage)
    return PComplexMap(x, y, comps)
