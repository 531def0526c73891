"""Batch journal behaviour: determinism, resume, recovery, abort."""

import json

import pytest

from shannoneval.backends import NGramConfig, ReferenceBackend, UniformBackend
from shannoneval.errors import AbortBatch, BackendUnavailable, ConfigMismatch, SchemaError
from shannoneval.harness import (
    EvalDataset,
    config_hash,
    load_dataset,
    read_score_file,
    run_metrics,
)
from shannoneval.metrics import ScoringConfig

from helpers import random_docs, write_pairs_jsonl

DOCS = random_docs(5, seed=303)
CONFIG = ScoringConfig()


@pytest.fixture(scope="module")
def backend():
    return ReferenceBackend.train(DOCS, NGramConfig())


@pytest.fixture()
def dataset(tmp_path):
    path = tmp_path / "pairs.jsonl"
    triples = [
        (f"d{i}", doc, doc.split(". ")[0] + ".") for i, doc in enumerate(DOCS)
    ]
    write_pairs_jsonl(path, triples, with_ref=False)
    return load_dataset(path, format="pairs-jsonl")


class FlakyBackend:
    """Delegates to a real backend after the first ``fail_calls`` scores."""

    def __init__(self, inner, fail_calls: int):
        self.inner = inner
        self.fail_calls = fail_calls
        self.calls = 0
        self.model_id = inner.model_id
        self.context_limit = inner.context_limit

    def score(self, request):
        self.calls += 1
        if self.calls <= self.fail_calls:
            raise BackendUnavailable("injected outage")
        return self.inner.score(request)


class TestConfigHash:
    def test_stable(self, backend):
        assert config_hash(CONFIG, backend) == config_hash(CONFIG, backend)

    def test_accepts_model_id_string(self, backend):
        assert config_hash(CONFIG, backend) == config_hash(CONFIG, backend.model_id)

    @pytest.mark.parametrize(
        "other",
        [
            ScoringConfig(k_upstream=1),
            ScoringConfig(helper_separator=" "),
            ScoringConfig(degeneracy_epsilon=1e-6),
        ],
    )
    def test_sensitive_to_scoring_config(self, backend, other):
        assert config_hash(other, backend) != config_hash(CONFIG, backend)

    def test_sensitive_to_model(self, backend):
        assert config_hash(CONFIG, "other-model") != config_hash(CONFIG, backend)


class TestRunMetrics:
    def test_scores_every_pair(self, dataset, backend, tmp_path):
        out = tmp_path / "scores.jsonl"
        result = run_metrics(dataset, CONFIG, backend, score_path=out)
        assert result.scored_pairs == len(dataset.entries)
        assert result.skipped_pairs == 0
        assert set(result.table.values) == set(dataset.grid)
        for per_metric in result.table.values.values():
            assert set(per_metric) == {"shannon", "infodiff", "blanc"}
        assert not result.table.errors

    def test_rerun_is_a_noop(self, dataset, backend, tmp_path):
        out = tmp_path / "scores.jsonl"
        run_metrics(dataset, CONFIG, backend, score_path=out)
        before = out.read_bytes()
        result = run_metrics(dataset, CONFIG, backend, score_path=out)
        assert result.scored_pairs == 0
        assert result.skipped_pairs == len(dataset.entries)
        assert out.read_bytes() == before

    def test_concurrency_does_not_change_bytes(self, dataset, backend, tmp_path):
        serial = tmp_path / "serial.jsonl"
        threaded = tmp_path / "threaded.jsonl"
        run_metrics(dataset, CONFIG, backend, score_path=serial, concurrency=1)
        run_metrics(dataset, CONFIG, backend, score_path=threaded, concurrency=4)
        assert serial.read_bytes() == threaded.read_bytes()

    def test_metric_subset_only_writes_those_records(self, dataset, backend, tmp_path):
        out = tmp_path / "scores.jsonl"
        result = run_metrics(
            dataset, CONFIG, backend, metrics=("infodiff",), score_path=out
        )
        assert result.table.metrics == ("infodiff",)
        for line in out.read_text().splitlines():
            assert json.loads(line)["metric"] == "infodiff"

    def test_unknown_metrics_rejected(self, dataset, backend, tmp_path):
        with pytest.raises(ValueError):
            run_metrics(
                dataset, CONFIG, backend, metrics=("rouge",), score_path=tmp_path / "x"
            )

    def test_bad_concurrency_rejected(self, dataset, backend, tmp_path):
        with pytest.raises(ValueError):
            run_metrics(
                dataset, CONFIG, backend, score_path=tmp_path / "x", concurrency=0
            )

    def test_empty_dataset_returns_empty_table(self, backend, tmp_path):
        empty = EvalDataset(documents={}, entries=(), dimensions=(), ref_summaries={})
        result = run_metrics(empty, CONFIG, backend, score_path=tmp_path / "x.jsonl")
        assert result.table.values == {}
        assert not (tmp_path / "x.jsonl").exists()


class TestResume:
    def full_run_bytes(self, dataset, backend, tmp_path):
        out = tmp_path / "full.jsonl"
        run_metrics(dataset, CONFIG, backend, score_path=out)
        return out.read_bytes()

    def test_resume_at_entry_boundary_reproduces_bytes(self, dataset, backend, tmp_path):
        full = self.full_run_bytes(dataset, backend, tmp_path)
        lines = full.split(b"\n")[:-1]
        partial = tmp_path / "partial.jsonl"
        partial.write_bytes(b"".join(line + b"\n" for line in lines[:6]))  # 2 entries
        result = run_metrics(dataset, CONFIG, backend, score_path=partial)
        assert result.skipped_pairs == 2
        assert result.scored_pairs == len(dataset.entries) - 2
        assert partial.read_bytes() == full

    def test_resume_mid_entry_completes_missing_metrics(self, dataset, backend, tmp_path):
        full = self.full_run_bytes(dataset, backend, tmp_path)
        lines = full.split(b"\n")[:-1]
        partial = tmp_path / "partial.jsonl"
        partial.write_bytes(b"".join(line + b"\n" for line in lines[:4]))  # entry 2 torn
        result = run_metrics(dataset, CONFIG, backend, score_path=partial)
        reference = read_score_file(tmp_path / "full.jsonl")
        assert result.table.values == reference.values

    def test_torn_trailing_line_is_recovered(self, dataset, backend, tmp_path):
        full = self.full_run_bytes(dataset, backend, tmp_path)
        lines = full.split(b"\n")[:-1]
        partial = tmp_path / "torn.jsonl"
        partial.write_bytes(
            b"".join(line + b"\n" for line in lines[:3]) + lines[3][: len(lines[3]) // 2]
        )
        result = run_metrics(dataset, CONFIG, backend, score_path=partial)
        reference = read_score_file(tmp_path / "full.jsonl")
        assert result.table.values == reference.values

    def test_complete_record_missing_final_newline(self, dataset, backend, tmp_path):
        # crash after the record bytes but before the newline: the record
        # is kept and the next append must not fuse onto its line
        full = self.full_run_bytes(dataset, backend, tmp_path)
        lines = full.split(b"\n")[:-1]
        partial = tmp_path / "partial.jsonl"
        partial.write_bytes(b"".join(line + b"\n" for line in lines[:3]) + lines[3])
        result = run_metrics(dataset, CONFIG, backend, score_path=partial)
        assert partial.read_bytes() == full
        assert result.table.values == read_score_file(tmp_path / "full.jsonl").values

    def test_config_change_rejected(self, dataset, backend, tmp_path):
        out = tmp_path / "scores.jsonl"
        run_metrics(dataset, CONFIG, backend, score_path=out)
        with pytest.raises(ConfigMismatch):
            run_metrics(
                dataset, ScoringConfig(k_upstream=1), backend, score_path=out
            )


class TestTransientFailures:
    def test_outage_recorded_then_retried(self, dataset, backend, tmp_path):
        out = tmp_path / "scores.jsonl"
        flaky = FlakyBackend(backend, fail_calls=1)
        result = run_metrics(dataset, CONFIG, flaky, score_path=out)
        assert len(result.table.errors) == 1
        (per_metric,) = result.table.errors.values()
        assert all(m.startswith("BackendUnavailable") for m in per_metric.values())

        resumed = run_metrics(dataset, CONFIG, flaky, score_path=out)
        assert resumed.scored_pairs == 1
        assert not resumed.table.errors
        assert set(resumed.table.values) == set(dataset.grid)

    def test_consecutive_failures_abort(self, dataset, backend, tmp_path):
        out = tmp_path / "scores.jsonl"
        dead = FlakyBackend(backend, fail_calls=10**9)
        with pytest.raises(AbortBatch):
            run_metrics(dataset, CONFIG, dead, score_path=out, failure_limit=2)
        table = read_score_file(out)
        assert table.errors  # outage is journalled before the abort

    def test_abort_then_heal_completes(self, dataset, backend, tmp_path):
        out = tmp_path / "scores.jsonl"
        dead = FlakyBackend(backend, fail_calls=10**9)
        with pytest.raises(AbortBatch):
            run_metrics(dataset, CONFIG, dead, score_path=out, failure_limit=2)
        result = run_metrics(dataset, CONFIG, backend, score_path=out)
        assert set(result.table.values) == set(dataset.grid)
        assert not result.table.errors


class TestDegenerateRecords:
    def test_degenerate_shannon_becomes_error_record(self, dataset, tmp_path):
        out = tmp_path / "scores.jsonl"
        result = run_metrics(dataset, CONFIG, UniformBackend(), score_path=out)
        assert set(result.table.errors) == set(dataset.grid)
        for key in dataset.grid:
            assert result.table.errors[key]["shannon"].startswith(
                "DegenerateNormalization"
            )
            assert result.table.values[key]["infodiff"] == 0.0

    def test_degenerate_is_not_retried(self, dataset, tmp_path):
        out = tmp_path / "scores.jsonl"
        run_metrics(dataset, CONFIG, UniformBackend(), score_path=out)
        result = run_metrics(dataset, CONFIG, UniformBackend(), score_path=out)
        assert result.scored_pairs == 0
        assert result.skipped_pairs == len(dataset.entries)


class TestReadScoreFile:
    BASE = {"doc_id": "d", "system_id": "s", "config_hash": "abc"}

    def write(self, path, records):
        path.write_text(
            "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
        )

    def test_last_record_wins(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        self.write(
            path,
            [
                dict(self.BASE, metric="infodiff", value=1.0),
                dict(self.BASE, metric="infodiff", value=2.0),
            ],
        )
        table = read_score_file(path)
        assert table.values[("d", "s")]["infodiff"] == 2.0

    def test_value_overwrites_error(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        self.write(
            path,
            [
                dict(self.BASE, metric="infodiff", error="BackendUnavailable: x"),
                dict(self.BASE, metric="infodiff", value=2.0),
            ],
        )
        table = read_score_file(path)
        assert table.values[("d", "s")]["infodiff"] == 2.0
        assert not table.errors

    def test_error_overwrites_value(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        self.write(
            path,
            [
                dict(self.BASE, metric="infodiff", value=2.0),
                dict(self.BASE, metric="infodiff", error="BackendUnavailable: x"),
            ],
        )
        table = read_score_file(path)
        assert not table.values
        assert table.errors[("d", "s")]["infodiff"].startswith("BackendUnavailable")

    def test_expect_hash_mismatch(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        self.write(path, [dict(self.BASE, metric="infodiff", value=1.0)])
        with pytest.raises(ConfigMismatch):
            read_score_file(path, expect_hash="different")

    @pytest.mark.parametrize(
        "record",
        [
            {"doc_id": "d", "system_id": "s", "metric": "m"},  # missing hash
            dict(BASE, metric="m"),  # neither value nor error
            dict(BASE, metric="m", value=1.0, error="x"),  # both
            dict(BASE, metric="m", value=True),  # bool is not a number
        ],
    )
    def test_malformed_record_rejected(self, tmp_path, record):
        path = tmp_path / "scores.jsonl"
        self.write(path, [record])
        with pytest.raises(SchemaError):
            read_score_file(path)

    def test_torn_line_mid_file_is_fatal(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        good = json.dumps(dict(self.BASE, metric="m", value=1.0))
        path.write_text('{"torn\n' + good + "\n")
        with pytest.raises(SchemaError):
            read_score_file(path)

    def test_metrics_property_in_canonical_order(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        self.write(
            path,
            [
                dict(self.BASE, metric="blanc", value=0.1),
                dict(self.BASE, metric="shannon", value=0.5),
            ],
        )
        assert read_score_file(path).metrics == ("shannon", "blanc")
