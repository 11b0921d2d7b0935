import json

import numpy as np
import pytest

import twistlab as tw
from twistlab.cli import main
from twistlab.files import (
    element_to_json,
    idempotent_to_json,
    load_triple,
    matrix_from_json,
    matrix_to_json,
    pert_from_json,
    pert_to_json,
    triple_from_json,
    triple_to_json,
)
from twistlab.models import U1U2_SHAPE
from twistlab.morita import AlgebraMatrix, IdempotentData

from conftest import random_pert


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli")
    rc = main(["model", "u1u2", "--kx", "1,0.5", "--ky", "0.7,-0.2",
               "--verify", "3", "--out", str(path / "u1u2.json")])
    assert rc == 0
    rng = np.random.default_rng(0)
    model = tw.build_u1u2(1 + 0.5j, 0.7 - 0.2j)
    p = random_pert(model.triple, rng, 2)
    (path / "pert.json").write_text(json.dumps(pert_to_json(p)))
    u = U1U2_SHAPE.random_unitary(rng)
    (path / "unitary.json").write_text(json.dumps(element_to_json(u.element)))
    h = 0.5 * U1U2_SHAPE.unit()
    e2 = IdempotentData(AlgebraMatrix(U1U2_SHAPE, ((h, h), (h, h))))
    (path / "idem.json").write_text(json.dumps(idempotent_to_json(e2)))
    rc = main(["model", "u1u2", "--kx", "1,0.5", "--ky", "0,0",
               "--verify", "3", "--out", str(path / "u1u2_ky0.json")])
    assert rc == 0
    return path


class TestRoundTrip:
    def test_matrix_json_roundtrip_exact(self):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        again = matrix_from_json(json.loads(json.dumps(matrix_to_json(m))))
        assert np.array_equal(m, again)

    def test_triple_roundtrip_exact(self, u1u2):
        doc = json.loads(json.dumps(triple_to_json(u1u2.triple)))
        t = triple_from_json(doc)
        assert np.array_equal(t.dirac, u1u2.triple.dirac)
        assert np.array_equal(t.grading, u1u2.triple.grading)
        assert np.array_equal(t.real.j.mat, u1u2.triple.real.j.mat)
        assert t.sigma.perm == u1u2.triple.sigma.perm
        assert t.real.epsilon_prime == 1

    def test_pert_roundtrip_exact(self, u1u2):
        rng = np.random.default_rng(2)
        p = random_pert(u1u2.triple, rng)
        again = pert_from_json(U1U2_SHAPE, json.loads(json.dumps(pert_to_json(p))))
        for (a, b), (a2, b2) in zip(p.pairs, again.pairs):
            assert a.defect(a2) == 0.0 and b.defect(b2) == 0.0


class TestCheck:
    def test_exit_zero_with_first_order_violated(self, workdir, capsys):
        rc = main(["check", str(workdir / "u1u2.json")])
        out = capsys.readouterr().out
        assert rc == 0
        assert "first_order" in out and "VIOLATED" in out

    def test_require_first_order_fails(self, workdir):
        assert main(["check", str(workdir / "u1u2.json"), "--require-first-order"]) == 1

    def test_malformed_json_exits_two(self, workdir, capsys):
        bad = workdir / "bad.json"
        bad.write_text("{nope")
        assert main(["check", str(bad)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_file_exits_two(self, workdir):
        assert main(["check", str(workdir / "missing.json")]) == 2

    def test_json_output_deterministic(self, workdir, capsys):
        rc = main(["check", str(workdir / "u1u2.json"), "--json", "--seed", "3"])
        first = capsys.readouterr().out
        rc2 = main(["check", str(workdir / "u1u2.json"), "--json", "--seed", "3"])
        second = capsys.readouterr().out
        assert rc == rc2 == 0
        assert first == second
        doc = json.loads(first)
        assert doc["real"]["ko_dimension"] == 6
        assert doc["failures"] == []


class TestFluctuate:
    def test_matches_library_bit_for_bit(self, workdir, capsys):
        rc = main(["fluctuate", str(workdir / "u1u2.json"), str(workdir / "pert.json"),
                   "--check-mu", "--json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        t = load_triple(str(workdir / "u1u2.json"))
        p = pert_from_json(t.shape, json.loads((workdir / "pert.json").read_text()))
        f = tw.fluctuate(t, p)
        assert np.array_equal(matrix_from_json(doc["d_omega"]), f.d_omega)
        assert doc["mu_action_defect"] <= 1e-12

    def test_unit_pert_echoes_dirac(self, workdir, capsys, u1u2):
        unit = workdir / "unit_pert.json"
        unit.write_text(json.dumps(pert_to_json(tw.pert_unit(U1U2_SHAPE))))
        rc = main(["fluctuate", str(workdir / "u1u2.json"), str(unit), "--json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert np.allclose(matrix_from_json(doc["d_omega"]), u1u2.triple.dirac, atol=1e-13)

    def test_shape_mismatch_exits_two(self, workdir):
        bad = workdir / "badpert.json"
        bad.write_text(json.dumps([[[[[1.0, 0.0]]], [[[1.0, 0.0]]]]]))
        assert main(["fluctuate", str(workdir / "u1u2.json"), str(bad)]) == 2


class TestGaugeAndProduct:
    def test_gauge_defect_small(self, workdir, capsys):
        rc = main(["gauge", str(workdir / "u1u2.json"), str(workdir / "pert.json"),
                   str(workdir / "unitary.json")])
        assert rc == 0
        out = capsys.readouterr().out
        defect = float(out.split("covariance_defect:")[1].split()[0])
        assert defect <= 1e-10

    def test_gauge_unit_unitary(self, workdir, capsys):
        unit = workdir / "unit_unitary.json"
        unit.write_text(json.dumps(element_to_json(U1U2_SHAPE.unit())))
        rc = main(["gauge", str(workdir / "u1u2.json"), str(workdir / "pert.json"), str(unit)])
        assert rc == 0
        defect = float(capsys.readouterr().out.split("covariance_defect:")[1].split()[0])
        assert defect <= 1e-12

    def test_pert_mul(self, workdir, capsys):
        rc = main(["pert-mul", str(workdir / "u1u2.json"), str(workdir / "pert.json"),
                   str(workdir / "pert.json"), "--json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["pairs"] == 4


class TestModelAndMorita:
    def test_model_verification(self, workdir, capsys):
        rc = main(["model", "u1u2", "--kx", "1,0", "--ky", "1,0", "--verify", "10", "--json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["formula_max_defect"] <= 1e-10
        assert doc["first_order"] > 0.05

    def test_morita_self(self, workdir, capsys):
        rc = main(["morita", str(workdir / "u1u2.json"), "--self",
                   "--omega", str(workdir / "pert.json")])
        assert rc == 0
        out = capsys.readouterr().out
        assert float(out.split("d_r_equals_d_plus_omega:")[1].split()[0]) <= 1e-12

    def test_morita_idempotent(self, workdir, capsys):
        rc = main(["morita", str(workdir / "u1u2_ky0.json"),
                   "--idempotent", str(workdir / "idem.json"), "--json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["right_triple_passes"] and doc["real_triple_passes"]
        assert doc["real_ko_dimension"] == 6

    def test_morita_idempotent_refused_without_first_order(self, workdir, capsys):
        rc = main(["morita", str(workdir / "u1u2.json"),
                   "--idempotent", str(workdir / "idem.json"), "--json"])
        doc = json.loads(capsys.readouterr().out)
        assert "first order" in doc.get("left_triple_error", "")
        assert "first-order" in doc.get("real_triple_error", "")

    def test_morita_connection_file(self, workdir, capsys, u1u2_ky0):
        from twistlab.pert import eta_adjoint_pairs, normalize

        t = u1u2_ky0.triple
        rng = np.random.default_rng(5)
        p = normalize(t, random_pert(t, rng, 2))
        padj = eta_adjoint_pairs(t, p)
        sym = tw.Perturbation(t.shape, tuple((0.5 * a, b) for a, b in p.pairs)
                              + tuple((0.5 * a, b) for a, b in padj.pairs))
        (workdir / "conn.json").write_text(json.dumps([[pert_to_json(sym)]]))
        e1 = IdempotentData(AlgebraMatrix(U1U2_SHAPE, ((U1U2_SHAPE.unit(),),)))
        (workdir / "idem1.json").write_text(json.dumps(idempotent_to_json(e1)))
        rc = main(["morita", str(workdir / "u1u2_ky0.json"),
                   "--idempotent", str(workdir / "idem1.json"),
                   "--connection", str(workdir / "conn.json"), "--json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["right_triple_passes"] and doc["real_triple_passes"]
