import json
from pathlib import Path

import pytest

from twistvoa.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "scripts" / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_delta_order_two(capsys):
    code, out, _ = run(capsys, "delta", "--order", "2")
    assert code == 0
    table = {(r["m"], r["n"]): r["value"] for r in json.loads(out)["c"]}
    assert table[(1, 1)] == "1/16"
    assert table[(1, 0)] == "-1/4"


def test_delta_order_zero_tsv(capsys):
    code, out, _ = run(capsys, "delta", "--order", "0", "--format", "tsv")
    assert code == 0
    assert out.splitlines() == ["m\tn\tc_mn", "0\t0\t0"]


def test_delta_negative_order_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["delta", "--order", "-1"])
    assert exc.value.code == 2


def test_unknown_suite(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code != 0


@pytest.mark.parametrize("suite", ["parity", "primary", "orbit", "ta-lemma"])
def test_verify_suites_pass(capsys, suite):
    code, out, _ = run(capsys, "verify", suite, "--deg", "2")
    doc = json.loads(out)
    assert code == 0 and doc["ok"]
    assert all(w["ok"] for w in doc["witnesses"])


def test_verify_commutator_small(capsys):
    code, out, _ = run(capsys, "verify", "commutator", "--deg", "2", "--modes", "3/2")
    assert code == 0 and json.loads(out)["manifest"]["cutoffs"]["modes"] == "3/2"


def test_verify_transform(capsys):
    code, out, _ = run(capsys, "verify", "transform", "--order", "6", "--deg", "2")
    assert code == 0 and json.loads(out)["ok"]


def test_output_independent_of_threads(capsys):
    _, one, _ = run(capsys, "verify", "ta-lemma", "--deg", "2", "--threads", "1")
    _, four, _ = run(capsys, "verify", "ta-lemma", "--deg", "2", "--threads", "4")
    assert one == four


def test_blocks_two_twisted(capsys):
    code, out, _ = run(capsys, "blocks", str(CONFIGS / "two_twisted.json"))
    doc = json.loads(out)
    assert code == 0
    assert doc["dims"]["0"] == 1 and doc["stable"] is True


def test_blocks_vacuum_insertion_same_table(capsys):
    _, a, _ = run(capsys, "blocks", str(CONFIGS / "two_twisted.json"), "--format", "tsv")
    _, b, _ = run(capsys, "blocks", str(CONFIGS / "two_twisted_plus_vacuum.json"), "--format", "tsv")
    assert a == b


def test_blocks_inline_json(capsys):
    cfg = '{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"pi_sigma"}],"degree_cutoff":1}'
    code, out, _ = run(capsys, "blocks", cfg)
    assert code == 0 and json.loads(out)["dims"] == {"0": 1, "1/2": 0, "1": 0}


def test_blocks_schema_error_has_path(capsys):
    code, _, err = run(capsys, "blocks", '{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"x"}]}')
    assert code == 2
    assert "config.marked[1].module" in err


def test_blocks_critical_level_rejected(capsys):
    code, _, err = run(capsys, "blocks", str(CONFIGS / "affine_critical.json"))
    assert code == 2 and "critical" in err
