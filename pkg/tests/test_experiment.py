import json

import numpy as np
import pytest

from riskrank import (
    DEFAULT_STRATEGIES,
    ExperimentConfig,
    StageError,
    StrategySpec,
    clustered_ratings,
    make_dataset,
    run_experiment,
    subsample,
    write_movielens_files,
)


@pytest.fixture(scope="module")
def synth_files(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth-small")
    triples, genres = clustered_ratings(
        num_users=80, num_items=90, ratings_per_user=30, seed=3
    )
    ratings_path, movies_path = write_movielens_files(out, triples, genres)
    return str(ratings_path), str(movies_path)


def _small_config(synth_files, **overrides):
    ratings_path, movies_path = synth_files
    base = dict(
        data_path=ratings_path,
        genres_path=movies_path,
        seed=17,
        num_splits=2,
        ks=(3, 5),
        methodology="full",
        d=8,
        max_iter=60,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_run_produces_full_metric_grid(synth_files, tmp_path):
    config = _small_config(synth_files, out_dir=str(tmp_path / "out"))
    report = run_experiment(config, summary=False)
    assert len(report.splits) == 2
    for split in report.splits:
        for strategy in ("3R", "MOD", "SUB", "PMF"):
            for k in (3, 5):
                for metric in ("ndcg", "map", "topic_coverage"):
                    assert split[strategy][k][metric] is not None

    out = tmp_path / "out"
    assert (out / "report.json").exists()
    curves = (out / "curves.csv").read_text().strip().splitlines()
    # header + (2 splits + mean + std) x 4 strategies x 2 ks x 3 metrics
    assert len(curves) == 1 + 4 * 4 * 2 * 3
    recs = sorted(p.name for p in (out / "recommendations").iterdir())
    assert recs == sorted(
        f"split{i}_{s.name}.csv" for i in range(2) for s in DEFAULT_STRATEGIES
    )
    for i in range(2):
        assert (out / "models" / f"split{i}" / "U.csv").exists()


def test_same_seed_byte_identical_report(synth_files):
    config = _small_config(synth_files)
    a = run_experiment(config, summary=False).to_json()
    b = run_experiment(config, summary=False).to_json()
    assert a == b


def test_different_seed_changes_report(synth_files):
    a = run_experiment(_small_config(synth_files), summary=False).to_json()
    b = run_experiment(_small_config(synth_files, seed=18), summary=False).to_json()
    assert a != b


def test_observed_only_methodology(synth_files):
    config = _small_config(synth_files, methodology="observed-only", ks=(3,))
    report = run_experiment(config, summary=False)
    for split in report.splits:
        for strategy in ("3R", "PMF"):
            assert 0.0 <= split[strategy][3]["ndcg"] <= 1.0


def test_ingest_failure_is_stage_tagged(tmp_path):
    config = ExperimentConfig(data_path=str(tmp_path / "missing.dat"), seed=1)
    with pytest.raises(StageError, match=r"\[ingest\]"):
        run_experiment(config, summary=False)


def test_reference_values_present_in_report(synth_files):
    report = run_experiment(_small_config(synth_files, ks=(3,)), summary=False)
    refs = report.metadata["reference_top5_full_data"]
    assert refs["movielens"]["ndcg"]["3R"] == 0.935
    assert refs["yahoo"]["ndcg"]["3R"] == 0.973
    assert report.metadata["strategy_aliases"] == {"3R": "RSR", "SUB": "SCA"}


def test_summary_prints_reference_values(synth_files, capsys):
    run_experiment(_small_config(synth_files, ks=(3,)), summary=True)
    out = capsys.readouterr().out
    assert "reference" in out
    assert "0.935" in out


def test_config_json_round_trip(synth_files):
    config = _small_config(synth_files, strategies=(
        StrategySpec("3R", "greedy-risk", a=-2.0),
        StrategySpec("PMF", "pointwise-topk"),
    ))
    again = ExperimentConfig.from_json(config.to_json())
    assert again == config


def test_strategy_spec_validation():
    with pytest.raises(ValueError, match="kind"):
        StrategySpec("X", "pairwise")


# --------------------------------------------------------------------------
# subsample
# --------------------------------------------------------------------------

def _counting_dataset():
    rows = []
    # user u0 rates 4 items, u1 rates 3, u2 rates 2, u3 rates 1
    for u, count in enumerate((4, 3, 2, 1)):
        for i in range(count):
            rows.append((f"u{u}", f"i{i}", 3))
    return make_dataset(rows)


def test_subsample_noop_keeps_everything():
    ds = _counting_dataset()
    out = subsample(ds, ds.num_users, ds.num_items)
    assert out.num_triples == ds.num_triples
    assert out.num_users == ds.num_users
    assert out.num_items == ds.num_items


def test_subsample_keeps_most_rated():
    ds = _counting_dataset()
    out = subsample(ds, 2, 2)
    # top users u0, u1; top items i0, i1 (rated 4 and 3 times)
    assert set(out.user_ids) == {"u0", "u1"}
    assert set(out.item_ids) == {"i0", "i1"}
    assert out.num_triples == 4


def test_subsample_single_cell():
    ds = _counting_dataset()
    out = subsample(ds, 1, 1)
    assert out.num_triples == 1
    assert out.user_ids == ("u0",)
    assert out.item_ids == ("i0",)


def test_subsample_deterministic():
    triples, genres = clustered_ratings(num_users=50, num_items=60,
                                        ratings_per_user=20, seed=9)
    ds = make_dataset(triples, genres)
    a = subsample(ds, 30, 30)
    b = subsample(ds, 30, 30)
    assert a.num_triples == b.num_triples
    assert np.array_equal(a.users, b.users)
    assert np.array_equal(a.ratings, b.ratings)
    assert a.item_ids == b.item_ids


def test_subsample_too_large_rejected():
    ds = _counting_dataset()
    with pytest.raises(ValueError, match="exceeds"):
        subsample(ds, 10, 2)


def test_subsample_preserves_genres():
    triples, genres = clustered_ratings(num_users=40, num_items=40,
                                        ratings_per_user=15, seed=4)
    ds = make_dataset(triples, genres)
    out = subsample(ds, 20, 20)
    for dense, item_id in enumerate(out.item_ids):
        assert out.genres[dense] == frozenset(genres[item_id])
