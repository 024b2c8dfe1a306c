"""Random graph and synthetic corpus generators shared by the test modules."""

from ldcnet import FluencyRecord, WeightedDigraph


def random_graph(rng, n, p=0.4, weights="uniform", max_weight=5.0):
    """Random digraph on w0..w{n-1}; arc probability p per ordered pair.

    ``weights`` is "uniform" for continuous weights in (0, max_weight] or
    "dyadic" for exact multiples of 1/16 (shortest-path sums stay exact,
    so tie detection is reproducible across algorithms).
    """
    names = [f"w{i:02d}" for i in range(n)]
    arcs = []
    for u in names:
        for v in names:
            if u == v or rng.random() >= p:
                continue
            if weights == "dyadic":
                w = rng.randrange(1, int(max_weight * 16) + 1) / 16.0
            else:
                w = max_weight * (1.0 - rng.random())
            arcs.append((u, v, w))
    return WeightedDigraph(arcs, vertices=names)


def complete_graph(n, weight=1.0):
    names = [f"w{i:02d}" for i in range(n)]
    return WeightedDigraph(
        [(u, v, weight) for u in names for v in names if u != v]
    )


def scale_weights(graph, factor):
    return WeightedDigraph(
        [(u, v, w * factor) for u, v, w in graph.arcs()], vertices=graph.vertices
    )


def make_record(subject, words, onsets=None):
    if onsets is None:
        onsets = [float(i + 1) for i in range(len(words))]
    return FluencyRecord(subject, tuple(zip(words, onsets)))


def random_records(rng, n_subjects=25, list_len=10, vocab_size=10, zipf=False):
    """Corpus of i.i.d. word draws with strictly increasing onsets.

    With ``zipf`` the draw weights follow 1/rank, so word frequency varies
    across the vocabulary.
    """
    vocab = [f"v{i:02d}" for i in range(vocab_size)]
    if zipf:
        cum = []
        total = 0.0
        for i in range(vocab_size):
            total += 1.0 / (i + 1)
            cum.append(total)
    records = []
    for s in range(n_subjects):
        words = []
        for _ in range(list_len):
            if zipf:
                x = rng.uniform(0.0, cum[-1])
                idx = next(i for i, c in enumerate(cum) if x <= c)
                words.append(vocab[idx])
            else:
                words.append(rng.choice(vocab))
        t = 0.0
        onsets = []
        for _ in words:
            t += rng.uniform(0.5, 2.0)
            onsets.append(t)
        records.append(FluencyRecord(f"s{s:03d}", tuple(zip(words, onsets))))
    return records


def boundary_records():
    """Four identical two-word subjects: the strict |P| > ms boundary fixture."""
    return [
        make_record(f"s{i}", ["cat", "dog"], [0.0, 1.0]) for i in range(4)
    ]


def write_corpus_csv(records, path):
    lines = ["subject,word,onset_seconds"]
    for record in records:
        for word, onset in record.entries:
            lines.append(f"{record.subject_id},{word},{onset!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
