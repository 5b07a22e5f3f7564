"""Smoke test for the unitons_py extension module.

Builds nothing itself: it loads the cdylib produced by
`cargo build -p unitons-py` (release preferred, debug accepted),
exposes it under the importable name unitons_py, and walks one
two-uniton example end to end.

Run from the repository root:  python3 python/smoke_test.py
"""

import json
import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libunitons_py.so",
        ROOT / "target" / "debug" / "libunitons_py.so",
    ]
    source = next((p for p in candidates if p.exists()), None)
    if source is None:
        sys.exit("no libunitons_py.so found; run `cargo build -p unitons-py` first")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="unitons_py_"))
    shutil.copy2(source, stage / "unitons_py.so")
    sys.path.insert(0, str(stage))
    import unitons_py

    return unitons_py


def main():
    up = load_module()

    # Two lines in C^2; their Blaschke-Potapov product has degree 2.
    a1 = up.Subspace([[1, 0]])
    a2 = up.Subspace([[1, 1]])
    assert a1.dim == 1 and a1.ambient == 2
    assert abs(a1.max_angle_to(a2) - math.pi / 4) < 1e-12

    loop = up.Loop.from_factors(2, [a1, a2])
    assert loop.n == 2 and (loop.kmin, loop.kmax) == (0, 2)
    assert loop.det_degree() == 2
    assert loop.unitarity_defect(24) < 1e-12

    # Refactorization recovers two line factors, the first one being the
    # range of the product at lambda = 0.
    fact = up.factorize(loop)
    assert len(fact) == 2
    assert [f.dim for f in fact.factors] == [1, 1]
    assert fact.verify_product(loop, 16) < 1e-10
    assert fact.factors[0].max_angle_to(a1) < 1e-8
    assert not fact.warnings

    fam = up.DeformationFamily(loop)
    assert fam.n == 2 and fam.level_count == 2

    # mu = 1 is the identity deformation.
    assert fam.deform_loop(1 + 0j).sup_distance(loop, 16) < 1e-12

    # The deformed loop is again unitary of degree 2 and again a product
    # of two lines, and deformations compose: (phi^mu)^nu = phi^(mu nu).
    mu, nu = 0.6 + 0.3j, 0.8 - 0.4j
    deformed = fam.deform_loop(mu)
    assert deformed.unitarity_defect(24) < 1e-9
    assert deformed.det_degree() == 2
    refact = up.factorize(deformed)
    assert len(refact) == 2
    assert refact.verify_product(deformed, 16) < 1e-9
    again = up.DeformationFamily(deformed)
    assert again.deform_loop(nu).sup_distance(fam.deform_loop(mu * nu), 16) < 1e-8

    # A single uniton is a fixed point of every deformation.
    one = up.DeformationFamily.from_factors(2, [a2])
    assert one.deform_loop(0.37 + 0.87j).sup_distance(one.base(), 16) < 1e-10

    # The mu = 0 limit exists (Gram determinant stays away from zero) and
    # is a homomorphism of the circle.
    assert abs(fam.gram_rel_det(0j) - 0.5) < 1e-10
    limit = fam.deform_loop(0j)
    assert limit.det_degree() == 2
    assert limit.unitarity_defect(24) < 1e-10
    assert fam.cocycle_defect_max(12) < 1e-10

    # Gram entries are polynomial along rays in mu; loop entries are
    # rational, so their fit residual is merely small, not machine zero.
    probe = fam.analyticity_probe(0.0, 33)
    assert probe["gram_max_residual"] < 1e-10
    assert probe["loop_max_residual"] < 1e-6

    # A small sweep: valid JSON report, CSV table, byte-identical reruns.
    config = json.dumps(
        {
            "n": 2,
            "unitons": [{"columns": [["1", "0"]]}, {"columns": [["1", "1"]]}],
            "grid": {
                "xmin": -1.0,
                "xmax": 1.0,
                "ymin": -1.0,
                "ymax": 1.0,
                "nx": 5,
                "ny": 5,
            },
            "mu": {"line_angle": 0.0, "samples": 5},
            "lambda_samples": 16,
        }
    )
    report_json, table_csv = up.run_sweep_json(config)
    again_json, again_csv = up.run_sweep_json(config)
    assert report_json == again_json and table_csv == again_csv
    report = json.loads(report_json)
    assert report["passed"] is True
    lines = table_csv.strip().splitlines()
    assert lines[0].startswith("mu_re,mu_im,unitarity")
    assert len(lines) == 1 + 5

    print("smoke test passed")


if __name__ == "__main__":
    main()
