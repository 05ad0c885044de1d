import pytest

import fomc_absa as fa

transformers = pytest.importorskip("transformers")


def corpus_sentences(fixtures):
    out = []
    for path in sorted((fixtures / "corpus").glob("*.txt")):
        for raw in fa.segment_document(path.read_text(encoding="utf-8")):
            cleaned = fa.preprocess_sentence(raw)
            if cleaned:
                out.append(cleaned)
    return out


def test_wordpiece_matches_reference_tokenizer(fixtures):
    vocab = fixtures / "vocab_fixture.txt"
    ours = fa.WordPieceTokenizer(vocab)
    ref = transformers.BertTokenizer(str(vocab), do_lower_case=True)
    extra = [
        "Café prices—and “core” PCE inflation—rose 2.5% (y/y); e.g., déjà vu!",
        "Unemployment: 3.7 percent… the labor-market was tight",
        "zero\u200bwidth joiners and tab\tseparated words",
    ]
    sentences = corpus_sentences(fixtures) + extra
    assert len(sentences) > 80
    for text in sentences:
        assert ours.tokenize(text) == ref.encode(text, truncation=True, max_length=512), text


def test_truncation_and_specials(fixtures):
    tok = fa.WordPieceTokenizer(fixtures / "vocab_small.txt")
    assert tok.tokenize("unemployment") == [2, 4, 5, 6, 3]
    ids = tok.tokenize("inflation " * 600)
    assert len(ids) == 512 and ids[0] == tok.cls_id and ids[-1] == tok.sep_id
    with pytest.raises(fa.EmbeddingError):
        tok.tokenize("   ")
