"""Model-mode pipeline driven by onnxruntime on a tiny synthetic encoder."""

import json

import numpy as np
import pytest

import fomc_absa as fa

onnx = pytest.importorskip("onnx")
pytest.importorskip("onnxruntime")
transformers = pytest.importorskip("transformers")
from onnx import TensorProto, helper, numpy_helper  # noqa: E402

from fomc_absa.onnx import OnnxEncoder, model_pipeline  # noqa: E402

DIM = 8
LAYERS = 6


def model_weights(vocab_size):
    rng = np.random.default_rng(11)
    table = rng.normal(size=(vocab_size, DIM)).astype(np.float32)
    scales = rng.uniform(0.5, 1.5, size=(LAYERS, DIM)).astype(np.float32)
    shifts = rng.normal(scale=0.1, size=(LAYERS, DIM)).astype(np.float32)
    w = rng.normal(size=(DIM, 3)).astype(np.float32)
    b = rng.normal(size=3).astype(np.float32)
    return table, scales, shifts, w, b


def layer_states(table, scales, shifts, ids):
    h = table[ids]
    out = [h]
    for k in range(1, LAYERS):
        h = h * scales[k] + shifts[k]
        out.append(h)
    return out  # hidden_0 .. hidden_{LAYERS-1}


def encoder_nodes(table, scales, shifts):
    inits = [numpy_helper.from_array(table, "table")]
    nodes = [helper.make_node("Gather", ["table", "input_ids"], ["hidden_0"], axis=0)]
    for k in range(1, LAYERS):
        inits += [numpy_helper.from_array(scales[k], f"s{k}"), numpy_helper.from_array(shifts[k], f"c{k}")]
        nodes += [
            helper.make_node("Mul", [f"hidden_{k - 1}", f"s{k}"], [f"m{k}"]),
            helper.make_node("Add", [f"m{k}", f"c{k}"], [f"hidden_{k}"]),
        ]
    return nodes, inits


def inputs():
    return [
        helper.make_tensor_value_info("input_ids", TensorProto.INT64, ["batch", "seq"]),
        helper.make_tensor_value_info("attention_mask", TensorProto.INT64, ["batch", "seq"]),
    ]


def save(graph, path):
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 17)])
    model.ir_version = 8
    onnx.checker.check_model(model)
    onnx.save(model, str(path))


@pytest.fixture
def model_dir(fixtures, tmp_path):
    vocab = fixtures / "vocab_fixture.txt"
    vocab_size = len(vocab.read_text(encoding="utf-8").splitlines())
    table, scales, shifts, w, b = model_weights(vocab_size)

    nodes, inits = encoder_nodes(table, scales, shifts)
    outputs = [helper.make_tensor_value_info(f"hidden_{k}", TensorProto.FLOAT, ["batch", "seq", DIM]) for k in range(LAYERS)]
    save(helper.make_graph(nodes, "encoder", inputs(), outputs, inits), tmp_path / "encoder.onnx")

    nodes, inits = encoder_nodes(table, scales, shifts)
    inits += [
        numpy_helper.from_array(np.array(0, dtype=np.int64), "zero"),
        numpy_helper.from_array(w, "w"),
        numpy_helper.from_array(b, "b"),
    ]
    nodes += [
        helper.make_node("Gather", [f"hidden_{LAYERS - 1}", "zero"], ["cls"], axis=1),
        helper.make_node("MatMul", ["cls", "w"], ["xw"]),
        helper.make_node("Add", ["xw", "b"], ["logits"]),
    ]
    logits = [helper.make_tensor_value_info("logits", TensorProto.FLOAT, ["batch", 3])]
    save(helper.make_graph(nodes, "classifier", inputs(), logits, inits), tmp_path / "classifier.onnx")

    (tmp_path / "labels.json").write_text(json.dumps({"labels": ["positive", "negative", "neutral"]}))
    (tmp_path / "head.json").write_text(json.dumps({"weight": w.T.tolist(), "bias": b.tolist()}))
    return tmp_path, (table, scales, shifts, w, b)


def model_config(fixtures, model, out):
    c = fa.PipelineConfig.from_json_file(fixtures / "run_all.json")
    c.backend = "model"
    c.output_dir = out
    c.vocab_path = fixtures / "vocab_fixture.txt"
    c.encoder_path = model / "encoder.onnx"
    c.classifier_path = model / "classifier.onnx"
    c.labels_path = model / "labels.json"
    c.head_path = model / "head.json"
    c.batch_size = 7
    return c


def test_encoder_callable_slices_padding(model_dir):
    model, _ = model_dir
    enc = OnnxEncoder(model / "encoder.onnx")
    assert enc.hidden_size == DIM
    states = enc([[2, 5, 3], [2, 5, 6, 7, 3]])
    assert [s.shape for s in states] == [(4, 3, DIM), (4, 5, DIM)]
    np.testing.assert_array_equal(states[0][:, :2, :], states[1][:, :2, :])


def test_model_pipeline_matches_numpy_oracle(fixtures, model_dir, tmp_path):
    model, (table, scales, shifts, w, b) = model_dir
    out = tmp_path / "out"
    pipeline = model_pipeline(model_config(fixtures, model, out))
    for stage in (pipeline.ingest, pipeline.embed, pipeline.aspects, pipeline.sentiment, pipeline.series):
        stage()

    ref = transformers.BertTokenizer(str(fixtures / "vocab_fixture.txt"), do_lower_case=True)
    sentences = [json.loads(line) for line in (out / "sentences.jsonl").read_text().splitlines()]
    vectors = {}
    for line in (out / "embeddings.jsonl").read_text().splitlines():
        rec = json.loads(line)
        vectors[(rec["doc_id"], rec["sent_index"], rec["pooling"])] = np.array(rec["vector"])
    preds = {}
    for line in (out / "sentiment.jsonl").read_text().splitlines():
        rec = json.loads(line)
        preds[(rec["doc_id"], rec["sent_index"])] = rec

    assert len(sentences) == 91
    for s in sentences:
        ids = ref.encode(s["text"], truncation=True, max_length=512)
        layers = layer_states(table, scales, shifts, np.array(ids))
        words = np.mean(np.stack(layers[-4:]).astype(np.float64), axis=0)
        expected = words[1:-1].mean(axis=0)
        got = vectors[(s["doc_id"], s["sent_index"], "sentence-mean")]
        np.testing.assert_allclose(got, expected, rtol=1e-5, atol=1e-6)

        logits = layers[-1][0].astype(np.float64) @ w + b
        p = np.exp(logits - logits.max())
        p /= p.sum()
        pred = preds[(s["doc_id"], s["sent_index"])]
        np.testing.assert_allclose(pred["probs"], p, rtol=1e-5, atol=1e-7)
        assert pred["label"] == fa.SENTIMENT_LABELS[int(np.argmax(p))]

    assert (out / "series.csv").read_text().startswith("month,aspect,score,n_sentences\n")


def test_label_order_is_enforced(fixtures, model_dir, tmp_path):
    model, _ = model_dir
    (model / "labels.json").write_text(json.dumps({"labels": ["negative", "positive", "neutral"]}))
    with pytest.raises(fa.ConfigError):
        model_pipeline(model_config(fixtures, model, tmp_path / "out"))
