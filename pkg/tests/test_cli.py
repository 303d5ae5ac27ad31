import io
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest
from meshes import TETRA_OBJ, staggered_torus, tetrahedron, torus_modulus

from polyperiods import builtin_spec, compare, reference
from polyperiods.cli import dumps, main, read_matrix
from polyperiods.mesh_io import dump_obj

SCHEMA = json.loads(resources.files("polyperiods.data").joinpath("compute_result.schema.json").read_text())


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    assert code == 0, text
    doc = json.loads(text)
    jsonschema.validate(doc, SCHEMA)
    return doc


@pytest.fixture
def tetra_path(tmp_path):
    p = tmp_path / "tetra.obj"
    p.write_text(TETRA_OBJ)
    return str(p)


def test_square_torus():
    doc = run_json("compute", "--generate", "flat-torus:4x4", "--scheme", "unit")
    assert doc["genus"] == 1
    assert abs(complex(doc["pi"]["re"][0][0], doc["pi"]["im"][0][0]) - 1j) <= 1e-10


def test_rhombic_generator():
    doc = run_json("compute", "--generate", "flat-torus:6x6:0.5+0.866i")
    assert compare(read_matrix(doc), [[0.5 + 0.866j]]) <= 1e-10


def test_generated_omega1():
    doc = run_json("compute", "--generate", "omega1:3")
    assert doc["mesh"]["vertices"] == 25
    assert compare(read_matrix(doc), reference("omega1").matrix) <= 1e-6


def test_spec_file(tmp_path):
    path = tmp_path / "omega1.json"
    path.write_text(json.dumps(builtin_spec("omega1").to_dict()))
    doc = run_json("compute", "--spec", str(path), "--refine", "1")
    assert compare(read_matrix(doc), reference("omega1").matrix) <= 1e-6


def test_mesh_input(tmp_path):
    path = tmp_path / "torus.obj"
    path.write_text(dump_obj(staggered_torus(48, 16)))
    for scheme in ("intrinsic", "extrinsic"):
        doc = run_json("compute", "--mesh", str(path), "--scheme", scheme)
        assert doc["scheme"] == scheme
        assert doc["mesh"]["min_angle_deg"] > 0
        assert compare(read_matrix(doc), [[torus_modulus()]]) <= 0.1


def test_root_option():
    a = run_json("compute", "--generate", "omega2:2", "--root", "0")
    b = run_json("compute", "--generate", "omega2:2", "--root", "5")
    assert a["pi_canonical"] is not None
    assert compare(read_matrix(a["pi_canonical"]), read_matrix(b["pi_canonical"])) <= 1e-10


def test_root_out_of_range():
    assert run("compute", "--generate", "omega2:2", "--root", "999")[0] == 1


def test_text_output():
    code, text = run("compute", "--generate", "omega3:2", "--out", "text")
    assert code == 0
    assert "period matrix" in text and "period_exactness" in text


def test_output_is_deterministic():
    assert run("compute", "--generate", "omega2:2")[1] == run("compute", "--generate", "omega2:2")[1]


def test_dumps_format():
    text = dumps({"x": -0.0, "y": 0.1, "n": np.int64(3), "b": np.bool_(False), "z": float("nan")})
    assert json.loads(text) == {"x": 0.0, "y": 0.1, "n": 3, "b": False, "z": None}
    assert "0.10000000000000001" in text


def test_genus_zero(tetra_path):
    assert run("compute", "--mesh", tetra_path)[0] == 3


def test_validate_tetrahedron(tetra_path):
    code, text = run("validate", "--mesh", tetra_path)
    assert code == 0
    assert "genus 0" in text and "valid" in text


def test_validate_generated():
    code, text = run("validate", "--generate", "omega3")
    assert code == 0 and "genus 2" in text


def test_validate_cocircular(tmp_path):
    mesh = tetrahedron([[0, 0, 0], [1, 1, 0], [0, 1, 0], [1, 0, 0]])
    path = tmp_path / "flat.obj"
    path.write_text(dump_obj(mesh))
    code, text = run("validate", "--mesh", str(path))
    assert code == 2
    assert "non-Delaunay" in text and "invalid" in text


def test_compute_reports_violation(tmp_path):
    mesh = tetrahedron([[0, 0, 0], [1, 1, 0], [0, 1, 0], [1, 0, 0]])
    path = tmp_path / "flat.obj"
    path.write_text(dump_obj(mesh))
    assert run("compute", "--mesh", str(path))[0] == 2


def test_validate_warns_about_thin_triangles(tmp_path):
    path = tmp_path / "thin.obj"
    path.write_text(dump_obj(staggered_torus(90, 4)))
    code, text = run("validate", "--mesh", str(path), "--scheme", "intrinsic")
    assert "thin triangles" in text


def test_bad_mesh(tmp_path):
    path = tmp_path / "bad.obj"
    path.write_text(TETRA_OBJ.replace("f 1 2 3", "f 1 2 2"))
    assert run("validate", "--mesh", str(path))[0] == 2


def test_bad_spec(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"squares": 1, "glue": [{"from": [0, "E"], "to": [0, "W"]}]}))
    assert run("compute", "--spec", str(path))[0] == 2


def test_missing_file():
    assert run("compute", "--mesh", "/nonexistent.obj")[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["compute"],
        ["compute", "--generate", "omega1", "--mesh", "x.obj"],
        ["compute", "--generate", "omega1", "--scheme", "intrinsic"],
        ["compute", "--generate", "klein-bottle"],
        ["compute", "--generate", "omega1", "--refine", "0"],
        ["compute", "--generate", "flat-torus:axb"],
    ],
)
def test_usage_errors(argv):
    try:
        code = main(argv, out=io.StringIO())
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_compare_references():
    code, text = run("compare", "omega1", "omega2")
    assert code == 0
    assert float(text.split("distance")[1]) > 0.1


def test_compare_lawson_conjecture_constant():
    code, text = run("compare", "lawson", "omega3", "--out", "json")
    assert code == 0 and json.loads(text)["distance"] == 0


def test_compare_genus_mismatch():
    assert run("compare", "omega1", "wente")[0] == 5


def test_compare_result_file(tmp_path):
    code, text = run("compute", "--generate", "omega1:3")
    path = tmp_path / "r.json"
    path.write_text(text)
    code, text = run("compare", str(path), "omega1", "--out", "json")
    assert code == 0 and json.loads(text)["distance"] <= 1e-6


def test_compare_unknown():
    assert run("compare", "omega1", "no-such-thing")[0] == 1


def _write_values(path, vals):
    path.write_text("\n".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in vals) + "\n")


def test_diagnose_constant(tmp_path):
    path = tmp_path / "f.txt"
    _write_values(path, np.full(62, 2.5 + 0j))
    code, text = run("diagnose", "--generate", "omega2:4", "--function", str(path), "--out", "json")
    doc = json.loads(text)
    assert code == 0
    assert doc["dirichlet_energy"] == doc["conformal_energy"] == doc["area"] == 0


def test_diagnose_random(tmp_path, rng):
    path = tmp_path / "f.txt"
    n = 62 + 64  # vertices and faces of omega2 at refinement 4
    _write_values(path, rng.normal(size=n) + 1j * rng.normal(size=n))
    doc = json.loads(run("diagnose", "--generate", "omega2:4", "--function", str(path), "--out", "json")[1])
    assert doc["identity_residual"] <= 1e-10 * doc["dirichlet_energy"]
    assert doc["dirichlet_energy"] > 0


def test_diagnose_wrong_length(tmp_path):
    path = tmp_path / "f.txt"
    _write_values(path, np.zeros(5))
    assert run("diagnose", "--generate", "omega2:4", "--function", str(path))[0] == 1


def test_diagnose_literal_values(tmp_path):
    path = tmp_path / "f.txt"
    path.write_text("# header\n" + "1+2i\n" * 14)
    code, text = run("diagnose", "--generate", "omega2:2", "--function", str(path))
    assert code == 0 and "conformal_energy" in text


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "polyperiods.cli", "compare", "omega3", "lawson"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert "distance" in proc.stdout
