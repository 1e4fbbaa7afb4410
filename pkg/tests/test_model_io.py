"""Model-exchange file format: canonical bytes, validation, round trips."""

import json
import math

import pytest

from evsim.core import PortSpec
from evsim.errors import ModelFormatError
from evsim.nets import DenseNet, Layer
from evsim.surrogate import (PortTag, SurrogateModel, check_ports, dumps_model,
                             load_model, loads_model, metrics_metadata,
                             save_model, table_model, validate, wrap_component)
from evsim.tables import Axis, GridTable


def small_table_model(metadata=None):
    table = GridTable(
        [Axis("soc", "1", [0.0, 0.5, 1.0]), Axis("temp_k", "K", [280.0, 320.0])],
        [3.0, 3.1, 3.4, 3.5, 3.9, 4.0],
    )
    return table_model(table, PortTag("v", "V"), metadata)


def small_net_model(metadata=None):
    net = DenseNet(
        [Layer(((0.5, -1.25),), (0.25,), "tanh"),
         Layer(((2.0,),), (-0.5,), "identity")],
        [(1.0, 2.0), (0.0, 1.0)],
        [(10.0, 4.0)],
    )
    return SurrogateModel("net", [PortTag("a", "1"), PortTag("b", "1")],
                          [PortTag("y", "W")], net, metadata)


def test_save_load_save_is_byte_identical(tmp_path):
    for model in (small_table_model({"source": "unit", "created": ""}),
                  small_net_model({"seed": 7})):
        first = dumps_model(model)
        again = dumps_model(loads_model(first))
        assert first == again
        path = tmp_path / "m.json"
        save_model(model, path)
        raw = path.read_bytes()
        assert raw.decode() == first
        save_model(load_model(path), path)
        assert path.read_bytes() == raw


def test_top_level_key_order_is_fixed():
    doc_keys = lambda text: list(json.loads(
        text, object_pairs_hook=lambda pairs: dict(pairs)).keys())
    table_text = dumps_model(small_table_model())
    assert doc_keys(table_text) == [
        "schema_version", "kind", "inputs", "outputs", "table", "metadata",
    ]
    net_text = dumps_model(small_net_model())
    assert doc_keys(net_text) == [
        "schema_version", "kind", "inputs", "outputs", "net", "metadata",
    ]


def test_serialized_form_is_compact_single_line_with_newline():
    text = dumps_model(small_table_model())
    assert text.endswith("\n")
    assert "\n" not in text[:-1]
    assert ": " not in text and ", " not in text


def test_schema_version_is_the_only_bare_int():
    text = dumps_model(small_net_model({"epochs": 200, "lr": 0.01, "n": 3}))
    assert '"schema_version":1,' in text
    # every metadata number is written as a float
    assert '"epochs":200.0' in text
    assert '"n":3.0' in text


def test_metadata_keys_sorted_recursively():
    model = small_table_model({"zeta": 1, "alpha": {"b": 2, "a": 1}})
    text = dumps_model(model)
    assert text.index('"alpha"') < text.index('"zeta"')
    inner = text[text.index('"alpha"'):]
    assert inner.index('"a"') < inner.index('"b"')


def test_metadata_rejects_non_finite_and_odd_types():
    with pytest.raises(ModelFormatError, match="non-finite"):
        dumps_model(small_table_model({"rmse": float("nan")}))
    with pytest.raises(ModelFormatError, match="unsupported value type"):
        dumps_model(small_table_model({"blob": object()}))


def test_metadata_bools_survive():
    text = dumps_model(small_table_model({"clipped": True}))
    assert '"clipped":true' in text


def test_non_ascii_metadata_is_escaped():
    text = dumps_model(small_table_model({"note": "25°C"}))
    assert "°" not in text
    assert "\\u00b0" in text


def test_loads_rejects_wrong_schema_version():
    text = dumps_model(small_table_model()).replace(
        '"schema_version":1', '"schema_version":99')
    with pytest.raises(ModelFormatError,
                       match=r"unsupported schema_version 99 \(this tool reads 1\)"):
        loads_model(text)


def test_loads_rejects_malformed_documents():
    good = json.loads(dumps_model(small_table_model()))

    def broken(mutate):
        doc = json.loads(dumps_model(small_table_model()))
        mutate(doc)
        return json.dumps(doc)

    with pytest.raises(ModelFormatError, match="not valid JSON"):
        loads_model("{nope")
    with pytest.raises(ModelFormatError, match="top level"):
        loads_model("[1,2]")
    with pytest.raises(ModelFormatError, match="unknown kind"):
        loads_model(broken(lambda d: d.update(kind="forest")))
    with pytest.raises(ModelFormatError, match=r"inputs\[0\]: missing unit"):
        loads_model(broken(lambda d: d["inputs"][0].pop("unit")))
    with pytest.raises(ModelFormatError, match="missing metadata"):
        loads_model(broken(lambda d: d.pop("metadata")))
    with pytest.raises(ModelFormatError, match="table block missing"):
        loads_model(broken(lambda d: d.pop("table")))
    with pytest.raises(ModelFormatError,
                       match=r"table.axes\[0\].*strictly increasing"):
        loads_model(broken(
            lambda d: d["table"]["axes"][0].update(coords=[1.0, 0.0])))
    with pytest.raises(ModelFormatError, match=r"values\[2\]: expected a number"):
        loads_model(broken(
            lambda d: d["table"].update(values=[1.0, 2.0, True, 4.0, 5.0, 6.0])))
    with pytest.raises(ModelFormatError, match="value count"):
        loads_model(broken(lambda d: d["table"]["values"].append(9.0)))
    assert good["kind"] == "table"


def test_loads_rejects_malformed_nets():
    def broken(mutate):
        doc = json.loads(dumps_model(small_net_model()))
        mutate(doc)
        return json.dumps(doc)

    with pytest.raises(ModelFormatError, match="mean and scale"):
        loads_model(broken(lambda d: d["net"].update(norm_in=[{"mean": 0.0}])))
    with pytest.raises(ModelFormatError,
                       match=r"layers\[0\]: unknown activation 'step'"):
        loads_model(broken(
            lambda d: d["net"]["layers"][0].update(activation="step")))
    with pytest.raises(ModelFormatError, match="ragged"):
        loads_model(broken(
            lambda d: d["net"]["layers"][0].update(weights=[[1.0, 2.0], [3.0]],
                                                   bias=[0.0, 0.0])))
    with pytest.raises(ModelFormatError, match="identity"):
        loads_model(broken(
            lambda d: d["net"]["layers"][1].update(activation="tanh")))
    with pytest.raises(ModelFormatError, match="declares 1->1 ports"):
        loads_model(broken(lambda d: d.update(
            inputs=[{"name": "a", "unit": "1"}])))


def test_table_payload_must_match_input_count():
    with pytest.raises(ValueError, match="axes"):
        SurrogateModel("table", [PortTag("a", "1")], [PortTag("y", "V")],
                       GridTable([Axis("a", "1", [0.0, 1.0]),
                                  Axis("b", "1", [0.0, 1.0])],
                                 [0.0, 1.0, 2.0, 3.0]),
                       None)
    with pytest.raises(ValueError, match="one output"):
        SurrogateModel("table",
                       [PortTag("a", "1")],
                       [PortTag("y", "V"), PortTag("z", "V")],
                       GridTable([Axis("a", "1", [0.0, 1.0])], [0.0, 1.0]),
                       None)


def test_load_model_missing_file(tmp_path):
    with pytest.raises(ModelFormatError, match="cannot read model file"):
        load_model(tmp_path / "absent.json")


def test_predict_matches_payload_eval():
    tm = small_table_model()
    assert tm.predict((0.25, 300.0)) == [tm.payload.eval((0.25, 300.0))]
    nm = small_net_model()
    assert nm.predict((0.3, -0.7)) == nm.payload.eval((0.3, -0.7))


def test_validate_metrics_hand_computed():
    model = small_table_model()
    pairs = [((0.0, 280.0), (3.2,)), ((1.0, 320.0), (4.0,))]
    (m,) = validate(model, pairs)
    # errors are -0.2 and 0.0
    assert m.rmse == pytest.approx(math.sqrt(0.04 / 2))
    assert m.max_abs_err == pytest.approx(0.2)
    sst = 2 * 0.4 ** 2
    assert m.r2 == pytest.approx(1.0 - 0.04 / sst)


def test_validate_r2_none_on_constant_targets():
    model = small_table_model()
    pairs = [((0.0, 280.0), (3.0,)), ((0.5, 280.0), (3.0,))]
    (m,) = validate(model, pairs)
    assert m.r2 is None
    meta = metrics_metadata([m])
    assert meta["r2"] == [None]
    assert meta["rmse"] == [m.rmse]


def test_check_ports_enforces_names_units_and_order():
    model = small_table_model()
    check_ports(model, [("soc", "1"), ("temp_k", "K")], [("v", "V")])
    with pytest.raises(ModelFormatError, match="do not match"):
        check_ports(model, [("temp_k", "K"), ("soc", "1")], [("v", "V")])
    with pytest.raises(ModelFormatError, match=r"expected inputs \(soc \[1\]"):
        check_ports(model, [("soc", "1")], [("v", "V")])


def test_wrap_component_checks_expected_ports():
    model = small_table_model()
    expect = [PortSpec("soc", "in", "1"), PortSpec("temp_k", "in", "K"),
              PortSpec("v_term", "out", "V")]
    with pytest.raises(ModelFormatError, match=r"missing output v_term \[V\]"):
        wrap_component(model, "surr", expect=expect)
    ok = wrap_component(model, "surr",
                        expect=[PortSpec("soc", "in", "1"),
                                PortSpec("temp_k", "in", "K"),
                                PortSpec("v", "out", "V")])
    outs, state = ok.step({"soc": 0.5, "temp_k": 280.0}, ok.initial_state(), 0.01)
    assert outs == {"v": model.payload.eval((0.5, 280.0))}
    assert state == ok.initial_state()
