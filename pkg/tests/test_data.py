"""Synthetic generator, CSV ingestion, preprocessing and splitting."""

import math

import numpy as np
import pytest

from freqsev.data import (
    ColumnSpec,
    DataError,
    DataSchema,
    Dataset,
    apply_preproc,
    fit_preproc,
    generate_synthetic,
    load_table,
    train_test_split,
    true_aggregate_mean,
    true_functions,
    true_log_frequency,
    true_log_severity,
)
from freqsev.families import ZeroInflatedPoisson
from freqsev.moments import aggregate_mean


class TestTruthFunctions:
    def test_corner_values(self):
        assert true_log_frequency(np.array([0.0, 0.0])) == pytest.approx(0.5)
        assert true_log_severity(np.array([0.0, 0.0])) == pytest.approx(0.0)
        assert true_log_frequency(np.array([0.5, 0.5])) == pytest.approx(0.0)
        assert true_log_severity(np.array([0.5, 0.5])) == pytest.approx(0.5)

    def test_aggregate_mean_at_center(self):
        x = np.array([0.5, 0.5])
        expected = aggregate_mean(ZeroInflatedPoisson(0.2), 1.0, 0.5, 0.5)
        assert true_aggregate_mean(x) == pytest.approx(expected, rel=1e-12)

    def test_triple(self):
        f, s, agg = true_functions(np.array([[0.0, 0.0], [0.5, 0.5]]))
        np.testing.assert_allclose(f, [0.5, 0.0])
        np.testing.assert_allclose(s, [0.0, 0.5])
        assert agg.shape == (2,)


class TestGenerator:
    def test_shapes_and_invariants(self):
        ds = generate_synthetic(5000, seed=0)
        assert len(ds) == 5000
        assert np.all(np.isin(np.round(ds.x * 10), np.arange(11)))
        assert np.all(ds.t == 1.0)
        assert np.all(ds.ybar[ds.n == 0] == 0.0)
        assert np.all(ds.ybar[ds.n > 0] > 0.0)

    def test_requires_a_record(self):
        with pytest.raises(ValueError):
            generate_synthetic(0, seed=0)

    def test_determinism(self):
        a = generate_synthetic(1000, seed=5)
        b = generate_synthetic(1000, seed=5)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.ybar, b.ybar)

    def test_zero_fraction(self):
        # P(N=0) averaged over the covariate grid: pi + (1-pi) E[exp(-lam)]
        axis = np.arange(11) / 10.0
        g1, g2 = np.meshgrid(axis, axis, indexing="ij")
        lam = np.exp((g1 - 0.5) ** 2 + (g2 - 0.5) ** 2)
        expected = 0.2 + 0.8 * np.exp(-lam).mean()
        ds = generate_synthetic(40_000, seed=1)
        assert abs(np.mean(ds.n == 0) - expected) < 0.01

    def test_count_mean_at_fixed_cell(self):
        ds = generate_synthetic(1_000_000, seed=2)
        cell = (ds.x[:, 0] == 0.5) & (ds.x[:, 1] == 0.5)
        n = ds.n[cell]
        se = n.std() / math.sqrt(len(n))
        assert abs(n.mean() - 0.8 * 1.0) <= 3 * se  # (1-pi) lam at the center

    def test_severity_increases_with_count(self):
        ds = generate_synthetic(400_000, seed=3)
        cell = (ds.x[:, 0] == 1.0) & (ds.x[:, 1] == 1.0)
        means = [ds.ybar[cell & (ds.n == k)].mean() for k in (1, 2, 3)]
        assert means[0] < means[1] < means[2]
        # true mean for one claim at the top corner: exp(2 + 0.5)
        assert means[0] == pytest.approx(math.exp(2.5), rel=0.1)


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return path


SCHEMA = DataSchema(
    covariates=[
        ColumnSpec("color", "categorical"),
        ColumnSpec("score", "numeric"),
    ],
    count="n",
    exposure="t",
    severity="ybar",
)


class TestLoadTable:
    def test_basic_load_and_drop_reporting(self, tmp_path):
        p = write_csv(
            tmp_path / "d.csv",
            "color,score,n,t,ybar\n"
            "a,50,0,1.0,0\n"
            "b,350,2,0.5,10.0\n"
            ",100,1,1.0,5.0\n"      # missing color -> dropped
            "c,NA,1,1.0,5.0\n"      # missing score -> dropped
            "c,200,1,0.0,5.0\n"     # bad exposure -> rejected
            "c,200,3,2.0,7.5\n",
        )
        table = load_table(p, SCHEMA)
        assert len(table) == 3
        assert table.n_dropped_missing == 2
        assert table.n_dropped_exposure == 1
        np.testing.assert_array_equal(table.n, [0, 2, 3])

    def test_severity_zeroed_for_claim_free_rows(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "color,score,n,t,ybar\na,1,0,1.0,9.9\n")
        table = load_table(p, SCHEMA)
        assert table.ybar[0] == 0.0

    def test_unparseable_numeric_reports_row_and_column(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "color,score,n,t,ybar\na,oops,1,1.0,2.0\n")
        with pytest.raises(DataError, match="row 0.*score"):
            load_table(p, SCHEMA)

    def test_missing_column_rejected(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "color,n,t,ybar\na,1,1.0,2.0\n")
        with pytest.raises(DataError, match="score"):
            load_table(p, SCHEMA)

    def test_count_optional_mode(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "color,score,t\na,1,1.0\n")
        table = load_table(p, SCHEMA, count_optional=True)
        assert table.n[0] == -1


class TestPreprocessing:
    def make_table(self, tmp_path):
        p = write_csv(
            tmp_path / "d.csv",
            "color,score,n,t,ybar\n"
            "a,50,0,1.0,0\n"
            "b,150,1,1.0,3.0\n"
            "c,350,2,1.0,4.0\n",
        )
        return load_table(p, SCHEMA)

    def test_one_hot_and_minmax(self, tmp_path):
        table = self.make_table(tmp_path)
        meta = fit_preproc(table)
        ds = apply_preproc(table, meta)
        # categories sorted {a, b, c}; "b" -> (0, 1, 0)
        np.testing.assert_array_equal(ds.x[1, :3], [0.0, 1.0, 0.0])
        # min 50 -> 0, max 350 -> 1
        assert ds.x[0, 3] == 0.0
        assert ds.x[2, 3] == 1.0
        assert ds.feature_names == ["color=a", "color=b", "color=c", "score"]
        assert meta.groups == [("color", [0, 1, 2]), ("score", [3])]

    def test_minmax_round_trip(self, tmp_path):
        table = self.make_table(tmp_path)
        meta = fit_preproc(table)
        ds = apply_preproc(table, meta)
        col = next(c for c in meta.columns if c["name"] == "score")
        recovered = ds.x[:, 3] * (col["max"] - col["min"]) + col["min"]
        np.testing.assert_allclose(recovered, [50.0, 150.0, 350.0], atol=1e-12)

    def test_refit_on_scaled_data_is_identity(self, tmp_path):
        table = self.make_table(tmp_path)
        meta = fit_preproc(table)
        ds = apply_preproc(table, meta)
        # feed the scaled numerics back through a freshly fitted scaler
        table.columns["score"] = list(ds.x[:, 3])
        meta2 = fit_preproc(table)
        ds2 = apply_preproc(table, meta2)
        np.testing.assert_allclose(ds2.x[:, 3], ds.x[:, 3], atol=1e-12)

    def test_unknown_category_encodes_to_zeros_with_warning(self, tmp_path):
        table = self.make_table(tmp_path)
        meta = fit_preproc(table)
        table.columns["color"][0] = "zebra"
        with pytest.warns(UserWarning, match="zebra"):
            ds = apply_preproc(table, meta)
        np.testing.assert_array_equal(ds.x[0, :3], [0.0, 0.0, 0.0])

    def test_log_transform_column(self, tmp_path):
        schema = DataSchema(
            covariates=[ColumnSpec("density", "numeric", log_transform=True)],
            count="n", exposure="t", severity="ybar",
        )
        p = write_csv(
            tmp_path / "d.csv",
            "density,n,t,ybar\n1,0,1,0\n100,0,1,0\n10000,0,1,0\n",
        )
        table = load_table(p, schema)
        meta = fit_preproc(table)
        ds = apply_preproc(table, meta)
        # log-scale min-max: log 1 -> 0, log 100 -> 0.5, log 10000 -> 1
        np.testing.assert_allclose(ds.x[:, 0], [0.0, 0.5, 1.0], atol=1e-12)

    def test_schema_ini_round_trip(self, tmp_path):
        schema = DataSchema(
            covariates=[
                ColumnSpec("Brand", "categorical"),
                ColumnSpec("Density", "numeric", log_transform=True),
            ],
            count="ClaimNb", exposure="Exposure", severity="AvgClaimAmount",
        )
        path = tmp_path / "schema.ini"
        schema.to_ini(path)
        loaded = DataSchema.from_ini(path)
        assert loaded == schema

    def test_constant_numeric_column(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "color,score,n,t,ybar\na,5,0,1,0\nb,5,0,1,0\n")
        table = load_table(p, SCHEMA)
        ds = apply_preproc(table, fit_preproc(table))
        np.testing.assert_array_equal(ds.x[:, 2], [0.0, 0.0])


class TestSplit:
    def test_sizes(self):
        ds = generate_synthetic(10, seed=0)
        train, test = train_test_split(ds, 0.3, seed=1)
        assert (len(train), len(test)) == (7, 3)

    def test_union_preserves_records(self):
        ds = generate_synthetic(100, seed=1)
        train, test = train_test_split(ds, 0.3, seed=2)
        merged = np.sort(np.concatenate([train.ybar, test.ybar]))
        np.testing.assert_array_equal(merged, np.sort(ds.ybar))

    def test_deterministic(self):
        ds = generate_synthetic(100, seed=2)
        a = train_test_split(ds, 0.25, seed=3)
        b = train_test_split(ds, 0.25, seed=3)
        np.testing.assert_array_equal(a[0].x, b[0].x)
        np.testing.assert_array_equal(a[1].x, b[1].x)

    def test_bad_fraction(self):
        ds = generate_synthetic(10, seed=3)
        with pytest.raises(ValueError):
            train_test_split(ds, 0.0, seed=0)
        with pytest.raises(ValueError):
            train_test_split(ds, 1.0, seed=0)


class TestDatasetInvariants:
    def test_severity_for_claim_free_rows_must_be_zero(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((1, 2)), np.array([0]), np.ones(1), np.array([3.0]))

    def test_exposures_must_be_positive(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((1, 2)), np.array([1]), np.zeros(1), np.array([3.0]))

    def test_claims_subset(self):
        ds = generate_synthetic(1000, seed=4)
        claims = ds.claims_only()
        assert np.all(claims.n > 0)
        assert len(claims) == int(np.sum(ds.n > 0))
