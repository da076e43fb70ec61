from __future__ import annotations

from itertools import permutations

import numpy as np
import pytest

from topicnets import _gibbs
from topicnets.corpus import TokenizedDoc, Vocabulary, YearMonth
from topicnets.topics import (
    CumulativeCoverageScheme,
    LdaConfig,
    ThresholdScheme,
    assign_articles,
    infer_theta,
    load_model,
    save_model,
    top_words,
    train_lda,
)

MONTH = YearMonth(2000, 1)


def make_vocab(n):
    terms = [f"term{i:03d}" for i in range(n)]
    return Vocabulary(terms=terms, index={t: i for i, t in enumerate(terms)}, min_count=1)


def planted_corpus(rng, n_topics=5, words_per_topic=20, n_docs=500, doc_len=40):
    """Disjoint vocabulary blocks; every document drawn from one block."""
    vocab = make_vocab(n_topics * words_per_topic)
    weights = [rng.dirichlet(np.ones(words_per_topic)) for _ in range(n_topics)]
    docs = []
    truth = []
    for d in range(n_docs):
        z = d % n_topics
        ids = rng.choice(words_per_topic, size=doc_len, p=weights[z]) + z * words_per_topic
        docs.append(TokenizedDoc(f"d{d}", tuple(int(i) for i in ids), MONTH))
        truth.append(z)
    phi = np.zeros((n_topics, len(vocab)))
    for z in range(n_topics):
        phi[z, z * words_per_topic : (z + 1) * words_per_topic] = weights[z]
    return vocab, docs, truth, phi


def best_topic_permutation(phi_learned, phi_true):
    """Match learned topics to planted ones by minimal total variation."""
    k = phi_true.shape[0]
    best, best_cost = None, np.inf
    for perm in permutations(range(k)):
        cost = sum(
            0.5 * np.abs(phi_learned[perm[t]] - phi_true[t]).sum() for t in range(k)
        )
        if cost < best_cost:
            best, best_cost = perm, cost
    return best, best_cost / k


def test_single_topic_is_degenerate():
    vocab = make_vocab(4)
    docs = [TokenizedDoc("a", (0, 1, 2), MONTH), TokenizedDoc("b", (2, 3), MONTH)]
    model = train_lda(docs, vocab, LdaConfig.default(k=1, seed=3, iterations=5))
    assert np.allclose(model.theta, 1.0)
    counts = np.bincount([0, 1, 2, 2, 3], minlength=4)
    expected = (counts + 0.01) / (counts.sum() + 4 * 0.01)
    assert np.allclose(model.phi[0], expected)


def test_training_is_deterministic():
    rng = np.random.default_rng(1)
    vocab, docs, _, _ = planted_corpus(rng, n_topics=3, n_docs=60, doc_len=15)
    cfg = LdaConfig.default(k=3, seed=99, iterations=50)
    m1 = train_lda(docs, vocab, cfg)
    m2 = train_lda(docs, vocab, cfg)
    assert np.array_equal(m1.phi, m2.phi)
    assert np.array_equal(m1.theta, m2.theta)


def test_training_recovers_planted_topics():
    rng = np.random.default_rng(7)
    vocab, docs, truth, phi_true = planted_corpus(rng)
    model = train_lda(docs, vocab, LdaConfig.default(k=5, seed=11, iterations=300))
    perm, mean_tv = best_topic_permutation(model.phi, phi_true)
    assert mean_tv <= 0.15
    # top-10 of each recovered topic should mostly match the planted top-10
    for t in range(5):
        planted_top = {
            vocab.terms[i] for i in np.argsort(phi_true[t])[::-1][:10]
        }
        learned_top = {w for w, _ in top_words(model, perm[t], 10)}
        assert len(planted_top & learned_top) >= 8


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        train_lda([], make_vocab(3), LdaConfig.default(k=2, seed=0))
    with pytest.raises(ValueError):
        train_lda(
            [TokenizedDoc("a", (), MONTH)], make_vocab(3), LdaConfig.default(k=2, seed=0)
        )


def test_oversized_k_warns():
    vocab = make_vocab(2)
    docs = [TokenizedDoc("a", (0, 1), MONTH)]
    with pytest.warns(UserWarning, match="exceeds total token count"):
        train_lda(docs, vocab, LdaConfig.default(k=5, seed=0, iterations=2))


def test_count_conservation_after_sweeps():
    rng = np.random.default_rng(3)
    vocab, docs, _, _ = planted_corpus(rng, n_topics=3, n_docs=40, doc_len=12)
    w_ids, d_ids = [], []
    for d, doc in enumerate(docs):
        w_ids.extend(doc.tokens)
        d_ids.extend([d] * len(doc.tokens))
    w = np.asarray(w_ids, np.int32)
    d = np.asarray(d_ids, np.int32)
    for iterations in (1, 3, 17):
        n_kw, n_dk = _gibbs.train_sweeps(
            w, d, 3, len(vocab), len(docs), 0.5, 0.01, iterations, 42
        )
        assert n_kw.sum() == w.size
        lengths = np.bincount(d, minlength=len(docs))
        assert np.array_equal(n_dk.sum(axis=1), lengths)


def test_vocab_permutation_equivariance():
    rng = np.random.default_rng(17)
    vocab, docs, _, _ = planted_corpus(rng, n_topics=3, n_docs=50, doc_len=10)
    v = len(vocab)
    perm = rng.permutation(v)
    docs_perm = [
        TokenizedDoc(doc.doc_id, tuple(int(perm[t]) for t in doc.tokens), doc.month)
        for doc in docs
    ]
    terms_perm = [""] * v
    for w in range(v):
        terms_perm[perm[w]] = vocab.terms[w]
    vocab_perm = Vocabulary(
        terms=terms_perm, index={t: i for i, t in enumerate(terms_perm)}, min_count=1
    )
    cfg = LdaConfig.default(k=3, seed=5, iterations=40)
    base = train_lda(docs, vocab, cfg)
    permuted = train_lda(docs_perm, vocab_perm, cfg)
    assert np.array_equal(permuted.phi[:, perm], base.phi)
    assert np.array_equal(permuted.theta, base.theta)


def test_infer_uniform_for_out_of_vocabulary_doc():
    vocab = make_vocab(6)
    docs = [TokenizedDoc("a", (0, 1, 2, 3), MONTH)]
    model = train_lda(docs, vocab, LdaConfig.default(k=4, seed=2, iterations=10))
    theta = infer_theta(model, TokenizedDoc("x", (), MONTH), seed=9)
    assert np.allclose(theta, 0.25, atol=1e-12)


def test_infer_single_topic():
    vocab = make_vocab(3)
    docs = [TokenizedDoc("a", (0, 1), MONTH)]
    model = train_lda(docs, vocab, LdaConfig.default(k=1, seed=2, iterations=5))
    theta = infer_theta(model, TokenizedDoc("x", (0,), MONTH), seed=1)
    assert theta.tolist() == [1.0]


def test_infer_recovers_planted_topic_and_is_deterministic():
    rng = np.random.default_rng(23)
    vocab, docs, truth, phi_true = planted_corpus(rng, n_docs=300)
    model = train_lda(docs, vocab, LdaConfig.default(k=5, seed=31, iterations=200))
    perm, _ = best_topic_permutation(model.phi, phi_true)
    held = TokenizedDoc(
        "held",
        tuple(
            int(i)
            for i in rng.choice(20, size=40, p=np.ones(20) / 20) + 2 * 20
        ),
        MONTH,
    )
    theta1 = infer_theta(model, held, seed=77)
    theta2 = infer_theta(model, held, seed=77)
    assert np.array_equal(theta1, theta2)
    assert theta1[perm[2]] >= 0.8
    assert abs(theta1.sum() - 1.0) <= 1e-9


def test_top_words_orders_and_breaks_ties():
    vocab = Vocabulary(
        terms=["zeta", "alpha", "mid"],
        index={"zeta": 0, "alpha": 1, "mid": 2},
        min_count=1,
    )
    docs = [TokenizedDoc("a", (0, 1, 2), MONTH)]
    model = train_lda(docs, vocab, LdaConfig.default(k=1, seed=1, iterations=2))
    # uniform counts -> identical probabilities -> lexicographic order
    assert [w for w, _ in top_words(model, 0, 3)] == ["alpha", "mid", "zeta"]
    with pytest.raises(ValueError):
        top_words(model, 1, 3)
    assert len(top_words(model, 0, 10)) == 3


def test_dominant_term_ranks_first():
    vocab = make_vocab(3)
    docs = [TokenizedDoc("a", (1,) * 50 + (0, 2), MONTH)]
    model = train_lda(docs, vocab, LdaConfig.default(k=1, seed=1, iterations=2))
    assert top_words(model, 0, 1)[0][0] == "term001"


def test_threshold_assignment_examples():
    thetas = np.array([[0.7, 0.2, 0.1], [0.5, 0.3, 0.2]])
    out = assign_articles(["a", "b"], thetas, ThresholdScheme(0.6))
    assert out[0].topics == (0,)
    assert out[1].topics == ()


def test_coverage_assignment_example():
    thetas = np.array([[0.4, 0.35, 0.25]])
    out = assign_articles(["a"], thetas, CumulativeCoverageScheme(0.5))
    assert out[0].topics == (0, 1)


def test_coverage_tie_broken_by_topic_id():
    thetas = np.array([[0.25, 0.25, 0.25, 0.25]])
    out = assign_articles(["a"], thetas, CumulativeCoverageScheme(0.5))
    assert out[0].topics == (0, 1)


def test_scheme_parameter_validation():
    with pytest.raises(ValueError):
        ThresholdScheme(0.0)
    with pytest.raises(ValueError):
        ThresholdScheme(1.0)
    with pytest.raises(ValueError):
        CumulativeCoverageScheme(0.0)
    with pytest.raises(ValueError):
        CumulativeCoverageScheme(1.2)
    CumulativeCoverageScheme(1.0)


def test_assignment_rejects_unnormalized_rows():
    with pytest.raises(ValueError):
        assign_articles(["a"], np.array([[0.5, 0.2]]), ThresholdScheme(0.6))


def test_threshold_above_half_assigns_at_most_one():
    rng = np.random.default_rng(2)
    thetas = rng.dirichlet(np.ones(6), size=2000)
    out = assign_articles([str(i) for i in range(2000)], thetas, ThresholdScheme(0.6))
    assert all(len(a.topics) <= 1 for a in out)


def test_model_loader_guards(tmp_path):
    vocab = make_vocab(4)
    docs = [TokenizedDoc("a", (0, 1, 2, 3), MONTH)]
    model = train_lda(docs, vocab, LdaConfig.default(k=2, seed=1, iterations=5))
    slim = tmp_path / "slim.json"
    save_model(model, slim, include_theta=False)
    again = load_model(slim)
    assert again.theta is None and again.doc_ids is None

    bogus = tmp_path / "bogus.json"
    bogus.write_text('{"format": "something-else"}')
    with pytest.raises(ValueError, match="not a"):
        load_model(bogus)

    import json

    payload = json.loads(slim.read_text())
    payload["vocabulary"]["terms"][0] = "tampered"
    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text(json.dumps(payload))
    with pytest.raises(ValueError, match="digest"):
        load_model(corrupt)

    with pytest.raises(ValueError):
        infer_theta(model, docs[0], seed=1, sweeps=10, burn_in=10)


def test_model_file_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    vocab, docs, _, _ = planted_corpus(rng, n_topics=2, n_docs=30, doc_len=8)
    model = train_lda(docs, vocab, LdaConfig.default(k=2, seed=6, iterations=20))
    model.meta["stopwords_digest"] = "abc"
    path = tmp_path / "model.json"
    save_model(model, path)
    again = load_model(path)
    assert np.array_equal(again.phi, model.phi)
    assert np.array_equal(again.theta, model.theta)
    assert again.doc_ids == model.doc_ids
    assert again.vocabulary.terms == vocab.terms
    assert again.config == model.config
    assert again.meta["stopwords_digest"] == "abc"
    # byte stability
    path2 = tmp_path / "model2.json"
    save_model(model, path2)
    assert path.read_bytes() == path2.read_bytes()
