"""Sullivan minimal models of single CDGAs and of maps.

The telescope kills the cone cohomology degree by degree.  For the
2-sphere's cohomology ring the first step attaches a degree-2 generator
hitting the fundamental class; the second attaches a degree-3 generator
whose differential is the square, exactly the classical model
Lambda(a2, y3; dy = a^2).
"""
from pmm import CdgaMorphism, FiniteCDGA, build_min_model
from pmm.expressions import render_element
from pmm.minimal import build_map_model

CAP = 5
ACAP = CAP + 2  # algebras carry two degrees of headroom for cone cohomology

s2 = FiniteCDGA(basis={0: ["one"], 2: ["a"]}, unit="one",
                products={("a", "a"): {}}, differential={}, degree_cap=ACAP)
model = build_min_model(s2, CAP)
print("minimal model of H*(S^2):")
for g in model.algebra.generators:
    print(f"  {g.name} (degree {g.degree}), "
          f"d {g.name} = {render_element(model.algebra.generator_diff(g.name))}, "
          f"m({g.name}) = {render_element(model.m.gen_images[g.name])}")

s3 = FiniteCDGA(basis={0: ["one"], 3: ["b"]}, unit="one",
                products={("b", "b"): {}}, differential={}, degree_cap=ACAP)
f = CdgaMorphism.on_basis(s2, s3, {"one": s3.one(), "a": s3.zero()})
mm = build_map_model(f, 4)
print("\nmodel of the zero map H*(S^2) -> H*(S^3) (the formal Hopf square):")
print("  domain generators:", [(g.name, g.degree) for g in mm.m.domain.generators])
print("  codomain generators:", [(g.name, g.degree) for g in mm.n.domain.generators])
for g in mm.m.domain.generators:
    print(f"  g({g.name}) = {render_element(mm.g.gen_images[g.name])}")
print("  per-step linear parts Q^k(g) recorded:",
      [(r.degree, f"{r.q_matrix.rows}x{r.q_matrix.cols}") for r in mm.reports])
