"""Transfer-operator discretization, stationary densities, orbit histograms."""

import numpy as np
import pytest

from cusp_induce import density as de


def arcsine_density(m_cells):
    edges = np.linspace(-1.0, 1.0, m_cells + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    h = 1.0 / (np.pi * np.sqrt(1.0 - centers**2))
    return h / (h.sum() * (2.0 / m_cells))


def test_l1_distance_basics():
    a = np.array([1.0, 1.0, 0.0, 0.0])
    b = np.array([0.0, 0.0, 1.0, 1.0])
    assert de.l1_distance(a, a, 0.5) == 0.0
    assert de.l1_distance(a, b, 0.5) == pytest.approx(2.0)


def test_ulam_table_is_row_stochastic(lorenz, lorenz_partition):
    table = de.ulam_matrix(lorenz, lorenz_partition, m_cells=512)
    assert table.m == 512
    sums = np.asarray(table.matrix.sum(axis=1)).ravel()
    assert np.allclose(sums, 1.0, atol=1e-12)
    assert table.matrix.min() >= 0
    assert np.all(table.coverage >= 0)


def test_stationary_density_is_fixed_point(lorenz, lorenz_partition):
    table = de.ulam_matrix(lorenz, lorenz_partition, m_cells=512)
    h = de.stationary_density(table)
    w = (table.edges[-1] - table.edges[0]) / table.m
    assert np.all(h >= 0)
    assert h.sum() * w == pytest.approx(1.0, rel=1e-9)
    p = h / h.sum()
    residual = np.abs(p @ table.matrix - p).sum()
    assert residual < 1e-8


def test_pull_back_produces_probability_density(lorenz, lorenz_partition):
    table = de.ulam_matrix(lorenz, lorenz_partition, m_cells=512)
    h_ind = de.stationary_density(table)
    h_map = de.pull_back(lorenz, lorenz_partition, h_ind, m_cells=512)
    w = 2.0 / 512
    assert np.all(h_map >= 0)
    assert h_map.sum() * w == pytest.approx(1.0, rel=1e-9)


def test_invariance_residual_detects_the_right_density(cheb):
    # the closed-form density passes, a uniform impostor does not
    good = de.invariance_residual(cheb, arcsine_density(1024))
    bad = de.invariance_residual(cheb, np.full(1024, 0.5))
    assert good < 0.04
    assert bad > 0.3


def test_birkhoff_histogram_statistics(cheb):
    w = 2.0 / 256
    b1 = de.birkhoff_histogram(cheb, seed_count=2, n_steps=2 * 10**5,
                               m_cells=256, seed=1)
    b2 = de.birkhoff_histogram(cheb, seed_count=2, n_steps=2 * 10**5,
                               m_cells=256, seed=2)
    assert b1.sum() * w == pytest.approx(1.0, rel=1e-9)
    assert de.l1_distance(b1, b2, w) < 0.15
    assert de.l1_distance(b1, arcsine_density(256), w) < 0.15


def test_birkhoff_histogram_deterministic_per_seed(cheb):
    kw = dict(seed_count=2, n_steps=10**4, m_cells=128, seed=5)
    b1 = de.birkhoff_histogram(cheb, **kw)
    b2 = de.birkhoff_histogram(cheb, **kw)
    assert np.array_equal(b1, b2)


def test_density_pipeline_end_to_end(lorenz, lorenz_partition):
    est = de.density_pipeline(lorenz, lorenz_partition, m_cells=512)
    assert est.m == 512
    assert est.invariance_residual < 0.05
    assert est.unresolved_mass >= 0
    assert len(est.cell_centers()) == 512
    w = 2.0 / 512
    assert est.h_map.sum() * w == pytest.approx(1.0, rel=1e-9)
    assert est.h_induced.sum() * w == pytest.approx(1.0, rel=1e-9)
    d = est.to_dict()
    assert set(d) >= {"m", "invariance_residual", "unresolved_mass", "params"}


def test_density_pipeline_deterministic(lorenz, lorenz_partition):
    e1 = de.density_pipeline(lorenz, lorenz_partition, m_cells=256)
    e2 = de.density_pipeline(lorenz, lorenz_partition, m_cells=256)
    assert np.array_equal(e1.h_map, e2.h_map)
    assert e1.invariance_residual == e2.invariance_residual


def test_density_csv(tmp_path, lorenz, lorenz_partition):
    import csv

    est = de.density_pipeline(lorenz, lorenz_partition, m_cells=256)
    path = tmp_path / "density.csv"
    est.write_csv(path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 256
    assert float(rows[0]["cell_center"]) == est.cell_centers()[0]
    assert float(rows[10]["density"]) == est.h_map[10]
