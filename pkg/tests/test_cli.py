import json

import pytest

from ndsid import modelio
from ndsid.cli import main
from ndsid.distance import CircuitParams, circuit_nds
from ndsid.errors import ModelFormatError
from ndsid.ident import nds_tfm
from ndsid.model import Scm
from ndsid.polymat import RatMatrix
from ndsid.ratpoly import as_rat

from test_ident import all_outputs_measured_model, rand_gzv_zero_model
import random


@pytest.fixture
def circuit_path(tmp_path):
    path = tmp_path / "circuit.json"
    assert main(["example", "--k1", "2/5", "--out", str(path)]) == 0
    return str(path)


# ---------------------------------------------------------------------------
# model file round-trips
# ---------------------------------------------------------------------------

def test_model_roundtrip_exact(tmp_path):
    m = circuit_nds(
        CircuitParams(t="3/2", k1="2/5", k2="9/10"),
        CircuitParams(t="3/2", k1="2/5", k2="1/3"),
    )
    path = tmp_path / "m.json"
    modelio.save_model(m, str(path))
    loaded, extras = modelio.load_model(str(path))
    assert loaded.phi.matrix == m.phi.matrix
    for a, b in zip(loaded.subsystems, m.subsystems):
        assert a == b
    # and a second round-trip is byte-stable
    path2 = tmp_path / "m2.json"
    modelio.save_model(loaded, str(path2))
    assert path.read_text() == path2.read_text()


def test_decimal_literals_parse_exactly(tmp_path):
    m = circuit_nds(
        CircuitParams(t=1, k1="2/5", k2="9/10"), CircuitParams(t=1, k1="2/5", k2="9/10")
    )
    doc = modelio.model_to_dict(m)
    # rewrite one entry as a JSON decimal literal
    doc["phi"] = [[0.25, 0, 0, 0], [0, 0, 0, -0.4]]
    path = tmp_path / "dec.json"
    path.write_text(json.dumps(doc))
    loaded, _ = modelio.load_model(str(path))
    assert loaded.phi.matrix[0][0] == as_rat("1/4")
    assert loaded.phi.matrix[1][3] == as_rat("-2/5")


def test_model_format_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ModelFormatError):
        modelio.load_model(str(path))
    path.write_text(json.dumps({"format_version": 1, "subsystems": []}))
    with pytest.raises(ModelFormatError):
        modelio.load_model(str(path))


def test_phi_pattern_roundtrip(tmp_path):
    m = rand_gzv_zero_model(random.Random(3))
    mv, mz = sum(m.v_dims()), sum(m.z_dims())
    pattern = [[(i + j) % 3 == 0 for j in range(mz)] for i in range(mv)]
    phi = Scm([[0] * mz for _ in range(mv)], zero_pattern=pattern)
    from ndsid.model import NdsModel

    m2 = NdsModel(list(m.subsystems), phi)
    path = tmp_path / "pat.json"
    modelio.save_model(m2, str(path))
    loaded, _ = modelio.load_model(str(path))
    assert loaded.phi.zero_pattern == phi.zero_pattern


def test_factorization_roundtrip(tmp_path):
    m = all_outputs_measured_model(random.Random(8))
    doc = modelio.model_to_dict(m)
    eye = RatMatrix.identity(2)
    doc["factorization"] = {
        "gbar_yv": modelio.ratmatrix_to_dict(eye),
        "gbar_zu": modelio.ratmatrix_to_dict(eye),
    }
    path = tmp_path / "fact.json"
    path.write_text(json.dumps(doc))
    loaded, extras = modelio.load_model(str(path))
    assert extras["gbar_yv"] == eye
    assert extras["gbar_zu"] == eye


# ---------------------------------------------------------------------------
# check command and exit codes
# ---------------------------------------------------------------------------

def test_check_identifiable_exit_zero(circuit_path, capsys):
    assert main(["check", circuit_path]) == 0
    outp = capsys.readouterr().out
    assert "identifiable" in outp


def test_check_half_k1_thm2_inconclusive(tmp_path, capsys):
    path = tmp_path / "half.json"
    assert main(["example", "--k1", "0.5", "--out", str(path)]) == 0
    code = main(["check", str(path), "--method", "thm2"])
    assert code == 2
    outp = capsys.readouterr().out
    assert "G_zu FNRR=False" in outp


def test_check_chain_method_agrees(circuit_path):
    assert main(["check", circuit_path, "--method", "chain"]) == 0


def test_check_json_output(circuit_path, capsys):
    code = main(["check", circuit_path, "--out", "json"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["format_version"] == 1
    assert report["verdict"] == "identifiable"
    assert report["exit_code"] == 0


def test_check_unidentifiable_with_witness_printed(tmp_path, capsys):
    # G_zv == 0 model with a rank-deficient Xi: exit 1 plus printed witness
    from ndsid.model import Dims, NdsModel, SubsystemRealized

    d = Dims(m_u=1, m_v=1, m_x=1, m_y=1, m_z=1, m_g=0, m_p=0)
    s = SubsystemRealized(
        dims=d,
        a_xx=[[as_rat(-1)]],
        a_xv=[[0]],
        b_x=[[1]],
        a_zx=[[1]],
        a_zv=[[0]],
        b_z=[[1]],
        c_x=[[1]],
        c_v=[[0]],
        d_u=[[0]],
    )
    m = NdsModel([s], Scm([[0]]))
    path = tmp_path / "unid.json"
    modelio.save_model(m, str(path))
    code = main(["check", str(path)])
    assert code == 1
    outp = capsys.readouterr().out
    assert "unidentifiable" in outp and "witness" in outp
    # the JSON rendering carries the same verdict and witness
    assert main(["check", str(path), "--out", "json"]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["witness"] is not None
    phi1 = [[as_rat(x) for x in row] for row in report["witness"]["phi1"]]
    phi2 = [[as_rat(x) for x in row] for row in report["witness"]["phi2"]]
    loaded, _ = modelio.load_model(str(path))
    assert phi1 != phi2
    assert nds_tfm(loaded, Scm(phi1)) == nds_tfm(loaded, Scm(phi2))


def test_check_cor2_via_file(tmp_path):
    m = all_outputs_measured_model(random.Random(61))
    from ndsid.polymat import normal_rank
    from ndsid.model import network_tfms

    doc = modelio.model_to_dict(m)
    eye = RatMatrix.identity(2)
    doc["factorization"] = {
        "gbar_yv": modelio.ratmatrix_to_dict(eye),
        "gbar_zu": modelio.ratmatrix_to_dict(eye),
    }
    path = tmp_path / "c2.json"
    path.write_text(json.dumps(doc))
    code = main(["check", str(path), "--method", "cor2"])
    expect = 0 if normal_rank(network_tfms(m).g_zv) == 2 else 1
    assert code == expect
    # auto prefers cor2 when the factorization is present
    assert main(["check", str(path)]) == expect


def test_check_missing_file_is_error(capsys):
    assert main(["check", "/nonexistent/model.json"]) == 4


def test_usage_error_exit_code():
    # usage problems exit with 4, never colliding with verdict codes 0..2
    for argv in (["check"], ["nonsense-command"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 4


# ---------------------------------------------------------------------------
# smith / kcf commands
# ---------------------------------------------------------------------------

def test_smith_command_circuit_g_yv(circuit_path, capsys):
    code = main(["smith", circuit_path, "--tfm", "yv", "--subsystem", "0", "--self-test"])
    assert code == 0
    outp = capsys.readouterr().out
    assert "rank 1" in outp
    assert "self-test" in outp and "pass" in outp


def test_smith_zero_tfm_rank_zero(tmp_path, capsys):
    from ndsid.model import Dims, NdsModel, SubsystemRealized

    d = Dims(m_u=1, m_v=1, m_x=1, m_y=1, m_z=1, m_g=0, m_p=0)
    s = SubsystemRealized(
        dims=d,
        a_xx=[[as_rat(-2)]],
        a_xv=[[0]],
        b_x=[[1]],
        a_zx=[[0]],
        a_zv=[[0]],
        b_z=[[0]],
        c_x=[[1]],
        c_v=[[0]],
        d_u=[[0]],
    )
    m = NdsModel([s], Scm([[0]]))
    path = tmp_path / "z.json"
    modelio.save_model(m, str(path))
    assert main(["smith", str(path), "--tfm", "zu", "--self-test"]) == 0
    assert "rank 0" in capsys.readouterr().out


def test_kcf_command(circuit_path, capsys):
    code = main(["kcf", circuit_path, "--subsystem", "1", "--self-test"])
    assert code == 0
    outp = capsys.readouterr().out
    assert "pencil M(lam): 6x6" in outp


# ---------------------------------------------------------------------------
# distance / example commands
# ---------------------------------------------------------------------------

def test_distance_sweep_csv_byte_identical(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    argv = ["distance", "--sweep", "0.3:0.2:0.7", "--n1", "2", "--n2", "3",
            "--seed", "5", "--csv"]
    assert main(argv + [str(out1)]) == 0
    assert main(argv + [str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().strip().splitlines()
    assert len(lines) == 2 + 3  # header comment + column row + 3 k1 rows


def test_distance_single_model(circuit_path, tmp_path, capsys):
    out = tmp_path / "d.csv"
    code = main(
        ["distance", circuit_path, "--n1", "2", "--n2", "2", "--seed", "3", "--csv", str(out)]
    )
    assert code == 0
    assert "d_sid_F" in capsys.readouterr().out
    assert out.read_text().startswith("# ndsid-distance-csv format_version=1")


def test_example_emits_verifiable_model(tmp_path):
    path = tmp_path / "ex.json"
    assert main(["example", "--t", "3/2", "--k1", "1/5", "--out", str(path)]) == 0
    loaded, _ = modelio.load_model(str(path))
    from ndsid.model import realize, subsystem_tfms
    from ndsid.polymat import rat_det
    from test_model import circuit_gzu_det_closed_form

    b = subsystem_tfms(realize(loaded.subsystems[0]))
    assert rat_det(b.g_zu) == circuit_gzu_det_closed_form("3/2", "1/5")
