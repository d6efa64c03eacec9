"""Smoke test for the compiled extension: `python python/smoke_test.py`."""

import random
import sys

import mlenhance as ml


def main():
    random.seed(0)
    y = ml.Plane(16, 12, [random.random() for _ in range(16 * 12)])

    cfg = ml.Config.preset("sharpen")
    assert ml.Config.parse(cfg.to_text()) == cfg

    z = ml.enhance_plane(y, cfg)
    assert (z.width, z.height) == (16, 12)
    assert all(0.0 <= v <= 1.0 for v in z.data())

    ident = ml.enhance_plane(y, ml.Config.preset("identity"))
    assert ident.max_abs_diff(y) < 1e-12

    base, bands, high = ml.decompose(y, cfg)
    parts = zip(base.data(), bands[0].data(), high.data(), y.data())
    assert max(abs(b + d + h - v) for b, d, h, v in parts) < 1e-12

    alpha, degenerate = ml.estimate_alpha(y, cfg, "closed")
    assert alpha > 0 and not degenerate

    curve = ml.curve_eval("s_curve", [-0.2, 0.0, 0.2], a=20, width=0.66)
    assert curve[1] == 0.0 and curve[0] == -curve[2]

    failed = [name for name, ok, _ in ml.verify() if not ok]
    assert not failed, failed
    print("smoke test ok: alpha=%.4g" % alpha)
    return 0


if __name__ == "__main__":
    sys.exit(main())
