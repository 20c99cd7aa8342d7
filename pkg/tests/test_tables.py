import numpy as np

from entanglement_ensembles import tables


def test_float_formatting_round_trips():
    x = 0.1 + 0.2
    assert float(tables.format_value(x)) == x
    assert float(tables.format_value(np.float64(x))) == x
    assert tables.format_value(3) == "3"
    assert tables.format_value("a") == "a"


def test_csv_text_and_file(tmp_path):
    text = tables.write_csv(tmp_path / "t.csv", ["a", "b"], [(1, 0.5), (2, 1 / 3)])
    assert text == "a,b\n1,0.5\n2,0.33333333333333331\n"
    assert (tmp_path / "t.csv").read_text() == text
    assert tables.write_csv(None, ["a"], []) == "a\n"
