"""Smoke test for the slabsel_py extension module.

Build and install first, e.g.

    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/slabsel-*.whl
"""

import math
import os
import tempfile

import slabsel_py as s


def main():
    nodes, weights = s.gauss_legendre(4)
    assert len(nodes) == 4 and abs(sum(weights) - 2.0) < 1e-14

    fast = s.solve("dsa", 8, 128, 0.99)
    slow = s.solve("richardson", 8, 128, 0.99)
    assert fast["converged"] and slow["converged"]
    assert fast["sweeps"] < slow["sweeps"]
    assert fast["balance_residual"] < 1e-3
    diff = max(abs(a - b) for a, b in zip(fast["scalar_flux"], slow["scalar_flux"]))
    assert diff / max(slow["scalar_flux"]) < 1e-3

    assert s.cohen_kappa(["a", "a", "b", "b"], ["a", "b", "a", "b"]) == 0.0
    assert s.accuracy(["a", "b", "b", "b"], ["a", "b", "b", "a"]) == 0.75

    with tempfile.TemporaryDirectory() as tmp:
        data = os.path.join(tmp, "data.csv")
        ratios = [k / 20 for k in range(21)]
        n = s.generate_dataset(data, sn_orders=[2, 8], cell_counts=[16, 64, 256], ratios=ratios)
        assert n == 126
        dist = s.label_distribution(data, "sweeps")
        assert math.isclose(sum(p for _, _, p in dist), 100.0)
        assert dict((name, count) for name, count, _ in dist)["richardson"] == 6

        model = s.Model.train(data, "rf", "sweeps", seed=3, trees=50)
        path = os.path.join(tmp, "rf.json")
        model.save(path)
        loaded = s.Model.load(path)
        assert loaded.kind == "rf"
        assert loaded.predict(8, 64, 0.0)[0] == "richardson"
        assert loaded.predict(8, 64, 0.9)[0] in ("dsa", "nda")
        assert loaded.predict(2, 256, 0.6) == model.predict(2, 256, 0.6)
        importance = dict(loaded.gini_importance())
        assert set(importance) == {"sn_order", "num_cells", "scattering_ratio"}

        report = s.evaluate(data, "knn", "sweeps", folds=4, repeats=5)
        assert len(report["folds"]) == 20
        assert 0.0 <= report["accuracy_mean"] <= 1.0

        try:
            s.Model.train(data, "unknown")
        except ValueError as e:
            assert "lda, knn, svm, mlp, rf" in str(e)
        else:
            raise AssertionError("unknown model kind accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
