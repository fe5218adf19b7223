"""Figure rendering writes non-empty PNGs for every report shape."""

from lmac.corpus import MODE_ESTIMATED, evaluate_model, load_chunks
from lmac.estimator import nll_bits
from lmac.figures import evaluation_figure, nll_figure, ranking_figure
from lmac.models import ModelSpec
from lmac.ranker import correlation_report, load_reference_accuracies, load_reference_ratios


def test_evaluation_figure(tmp_path, english_fixture_path):
    chunks = load_chunks(english_fixture_path, words_per_chunk=100, max_chunks=4)
    report = evaluate_model(ModelSpec.parse("uniform"), chunks, mode=MODE_ESTIMATED)
    out = tmp_path / "eval.png"
    evaluation_figure(report, out)
    assert out.stat().st_size > 0


def test_ranking_figure_with_and_without_table(tmp_path):
    report = correlation_report(load_reference_ratios(), load_reference_accuracies())
    with_table = tmp_path / "with.png"
    ranking_figure(report, load_reference_accuracies(), with_table)
    bare = tmp_path / "bare.png"
    ranking_figure(report, None, bare)
    assert with_table.stat().st_size > 0
    assert bare.stat().st_size > 0


def test_nll_figure(tmp_path):
    report = nll_bits(ModelSpec.parse("ngram:1").make(), list(b"abcabcabc"))
    out = tmp_path / "nll.png"
    nll_figure(report, out)
    assert out.stat().st_size > 0
