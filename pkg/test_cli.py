import pytest

from app.cli.main import main
from app.database.database import configure_engine


def _body(text):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def test_hull_uniform_quarter(capsys):
    assert main(["hull", "--uniform-b", "0.25"]) == 0
    assert capsys.readouterr().out == "infeasible, w1 = -1/8\n"


def test_hull_three_eighths(capsys):
    assert main(["hull", "--uniform-b", "3/8"]) == 0
    assert capsys.readouterr().out == "feasible, w = (1/16, 5/16, 5/16, 5/16)\n"


def test_bell_table_2_exact(capsys):
    assert main(["bell", "--distribution", "GGR:1,GRG:1,GRR:2", "--exact", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert _body(out) == ["11,12,13,21,22,23,31,32,33", "1,1/4,1/4,1/4,1,1/2,1/4,1/2,1"]
    assert "# case_b_fraction: 1/3" in out


def test_mc_csv_is_table_3_shaped_and_reproducible(capsys):
    args = ["mc", "--relation", "23", "--n", "20000", "--seed", "42", "--format", "csv"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    header, counts = _body(first)
    assert header == "11,12,13,21,22,23,31,32,33"
    values = [int(v) for v in counts.split(",")]
    assert values[0] == values[4] == values[8] == 20000
    assert "# seed: 42" in first
    assert "# generator: numpy.PCG64" in first


def test_recover_published(capsys):
    assert main(["recover", "--published", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert _body(out)[1:] == ["G9-1,62874", "G9-2,187317", "G9-3,187458", "G9-4,562351"]
    assert "# same: 1874252" in out
    assert "# different: 3748504" in out


def test_realm_relations(capsys):
    assert main(["realm", "--relations", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert [line.split(",")[0] for line in _body(out)[1:]] == [
        "23", "26", "27", "28", "34", "36", "38", "46", "47", "48", "67", "78",
    ]
    assert "# excluded_row_pairs: 24, 37, 68" in out


def test_out_dir_writes_one_file_per_table(tmp_path, capsys):
    assert main(["mc-all", "--n", "2000", "--seed", "3", "--format", "csv", "--out", str(tmp_path)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"table_4.csv", "relation_summary.csv", "table_3_relation_23.csv"} <= names
    assert len([n for n in names if n.startswith("table_3_relation_")]) == 12
    assert capsys.readouterr().out == ""


def test_unknown_relation_exits_one(capsys):
    assert main(["mc", "--relation", "24", "--n", "10", "--seed", "1"]) == 1
    err = capsys.readouterr().err
    assert "[ERROR]" in err and "Unknown functional relation" in err


def test_bad_distribution_exits_one(capsys):
    assert main(["bell", "--distribution", "GGX:1"]) == 1
    assert "[ERROR]" in capsys.readouterr().err


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as e:
        main(["teleport"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["hull"])
    assert e.value.code == 2


@pytest.mark.parametrize("command,fact", [
    ("quantum", "Facts 1 and 2"),
    ("bell", "Table 2"),
    ("realm", "Table 1"),
    ("mc", "Table 3"),
    ("mc-all", "Table 4"),
    ("hull", "hull"),
])
def test_help_names_the_fact(command, fact, capsys):
    with pytest.raises(SystemExit) as e:
        main([command, "--help"])
    assert e.value.code == 0
    assert fact in capsys.readouterr().out


def test_store_and_list_runs(tmp_path, capsys):
    configure_engine(f"sqlite:///{tmp_path / 'runs.db'}")
    assert main(["mc", "--relation", "36", "--n", "1000", "--seed", "8", "--store"]) == 0
    capsys.readouterr()
    assert main(["runs", "--format", "csv"]) == 0
    rows = _body(capsys.readouterr().out)
    assert rows[0] == "id,command,relation,seed,n,p_minus,case_b_fraction,created_at"
    assert rows[1].split(",")[1:5] == ["mc", "36", "8", "1000"]


@pytest.mark.parametrize("value", ["1/0", "abc", ""])
def test_unparseable_hull_fraction_exits_one(value, capsys):
    assert main(["hull", "--uniform-b", value]) == 1
    err = capsys.readouterr().err
    assert "[ERROR]" in err and "Not a rational number" in err


def test_negative_seed_exits_one(capsys):
    assert main(["quantum", "--n", "90", "--seed", "-1"]) == 1
    assert "Seeds must be non-negative" in capsys.readouterr().err


def test_quantum_records_export(capsys):
    args = ["quantum", "--records", "--pair", "23", "--n", "50", "--seed", "9", "--format", "csv"]
    assert main(args) == 0
    out = capsys.readouterr().out
    rows = _body(out)
    assert rows[0] == "trial_index,pair,outcome"
    assert [int(r.split(",")[0]) for r in rows[1:]] == list(range(50))
    assert {r.split(",")[1] for r in rows[1:]} == {"23"}
    assert {r.split(",")[2] for r in rows[1:]} <= {"RR", "RG", "GR", "GG"}
    assert "# seed: 9" in out
    assert main(args) == 0
    assert capsys.readouterr().out == out


def test_quantum_records_need_a_pair(capsys):
    assert main(["quantum", "--records", "--seed", "1"]) == 1
    assert "--records needs a fixed --pair" in capsys.readouterr().err


def test_report_csv_prints_every_table(capsys):
    assert main(["report", "--n", "2000", "--seed", "4", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    tables = [line.split(": ", 1)[1] for line in out.splitlines() if line.startswith("# table: ")]
    assert tables[:4] == ["quantum_facts", "table_1", "table_2", "superdet_facts"]
    assert len([t for t in tables if t.startswith("table_3_relation_")]) == 12
    assert tables[-1] == "table_4"
    assert "G9-1," in out


def test_report_out_dir_writes_markdown_json_and_tables(tmp_path, capsys):
    assert main(["report", "--n", "2000", "--seed", "4", "--format", "csv", "--out", str(tmp_path)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"report.md", "report.json", "table_1.csv", "table_2.csv", "table_4.csv"} <= names
    assert len([n for n in names if n.startswith("table_3_relation_")]) == 12
    assert (tmp_path / "table_4.csv").read_text().startswith("# table: table_4\n# seed: 4\n")
