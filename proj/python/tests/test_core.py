import math
import random

import numpy as np
import pytest
import scipy.stats

import fomc_absa as fa


def test_preprocess_rules():
    assert fa.preprocess_sentence("  The   Committee  Decided to keep the RATE unchanged. ") == (
        "the committee decided to keep the rate unchanged."
    )
    assert fa.preprocess_sentence("Too short to keep.") is None
    assert fa.preprocess_sentence("1.5 2.0 3.25 4 5 6 7 8") is None
    long = " ".join(f"w{i}" for i in range(120))
    assert len(fa.preprocess_sentence(long).split()) == fa.MAX_SENTENCE_WORDS
    phrase = "members agreed that growth was solid over the period"
    assert fa.preprocess_sentence(phrase, blacklist=["growth was solid"]) is None
    assert fa.preprocess_sentence(phrase) == phrase


def test_segmentation_keeps_abbreviations():
    parts = fa.segment_document("Mr. Powell spoke first. Inflation eased in the U.S. economy.")
    assert parts == ["Mr. Powell spoke first.", "Inflation eased in the U.S. economy."]


def test_cosine_and_aspect_ties():
    assert fa.cosine_similarity([1, 0], [2, 0]) == 1.0
    with pytest.raises(fa.NumericError):
        fa.cosine_similarity([0, 0], [1, 0])
    label, scores = fa.classify_aspect([1, 1, 0], {"inflation": [0, 1, 0], "growth": [1, 0, 0], "employment": [0, 0, 1]})
    assert label == "growth"
    assert scores["growth"] == scores["inflation"]
    label, _ = fa.classify_aspect([1, 0, 0], {"growth": [1, 1, 0]}, min_cos=0.9)
    assert label is None
    assert fa.distribution_entropy({"a": 1, "b": 1, "c": 1}) == pytest.approx(math.log(3), abs=1e-15)


def test_sentiment_helpers():
    probs, label = fa.predict_sentiment([0.0, 0.0, 0.0])
    assert label == "positive"
    assert probs == pytest.approx([1 / 3] * 3, abs=1e-15)
    assert fa.predict_sentiment([0, 1, 1])[1] == "negative"
    assert sum(fa.softmax([700.0, -700.0, 3.0])) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(fa.NumericError):
        fa.predict_sentiment([math.nan, 0, 0])


def test_ols_worked_example():
    r = fa.ols_fit([1, 2, 3], [1, 2, 4])
    assert r["beta"] == pytest.approx(1.5, abs=1e-12)
    assert r["alpha"] == pytest.approx(-2 / 3, abs=1e-12)
    assert r["r_squared"] == pytest.approx(27 / 28, abs=1e-12)
    with pytest.raises(fa.NumericError):
        fa.ols_fit([1, 1, 1], [1, 2, 3])


def test_ols_matches_scipy():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(3, 50)
        x = [rng.gauss(0, 2) for _ in range(n)]
        y = [0.3 - 1.2 * v + rng.gauss(0, 0.5) for v in x]
        ours = fa.ols_fit(x, y)
        ref = scipy.stats.linregress(x, y)
        assert ours["beta"] == pytest.approx(ref.slope, rel=1e-9)
        assert ours["alpha"] == pytest.approx(ref.intercept, rel=1e-9, abs=1e-12)
        assert ours["r_squared"] == pytest.approx(ref.rvalue**2, rel=1e-9)
        assert ours["se_beta"] == pytest.approx(ref.stderr, rel=1e-9)
        assert ours["p_beta"] == pytest.approx(ref.pvalue, rel=1e-6, abs=1e-300)


@pytest.mark.parametrize("df", [1, 2.5, 5, 10, 30, 200])
def test_student_t_matches_scipy(df):
    for t in np.linspace(-8, 8, 41):
        assert fa.student_t_cdf(t, df) == pytest.approx(scipy.stats.t.cdf(t, df), rel=1e-10, abs=1e-14)
        assert fa.student_t_two_sided_p(t, df) == pytest.approx(2 * scipy.stats.t.sf(abs(t), df), rel=1e-10, abs=1e-14)


def test_exception_hierarchy():
    assert issubclass(fa.ConfigError, ValueError)
    assert issubclass(fa.MissingArtifactError, FileNotFoundError)
    assert issubclass(fa.NumericError, ArithmeticError)
