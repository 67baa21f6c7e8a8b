"""Acceptance suite: one test per criterion, each printing a PASS line.

Heavy statistical checks run at the sizes the criteria state; tolerances are
pinned here and nowhere else.  Run with `pytest -s tests/test_acceptance.py`
to see the per-criterion lines.
"""

import json
import math
import os
import tempfile
import time

import numpy as np
import pytest

from oco_control.controller import (
    Alg1Controller,
    ExpertKey,
    default_params,
    expert_loss_and_grad,
)
from oco_control.costs import CostSchedule, LossSchedule, QuadraticClippedOracle
from oco_control.dap import (
    DapParams,
    NoiseWindow,
    build_psi_star,
    control_action,
    d_psi,
    rho,
    x_trunc,
)
from oco_control.harness import (
    ExperimentConfig,
    TraceRecord,
    run_experiment,
    write_trace_csv,
)
from oco_control.oco_engines import BfplState, bfpl_step
from oco_control.oco_hlt import Alg2Learner, hlt_params, optimistic_expert_loss, ridge_transform
from oco_control.system import (
    ClosedLoopSystem,
    LinearSystem,
    NoiseModel,
    certify_strong_stability,
    make_rng,
    sample_noise,
    wrap_stabilize,
)
from oco_control.costs import TransformedCostOracle


def _random_window(rng, H, d_x, W):
    win = NoiseWindow(H, d_x)
    for _ in range(2 * H):
        w = rng.standard_normal(d_x)
        win.push(w * (W * rng.random() / max(np.linalg.norm(w), 1e-12)))
    return win


def _random_dap(rng, H, d_x, d_u, R_M):
    mat = rng.standard_normal((d_u, H * d_x))
    mat *= R_M * rng.random() / max(np.linalg.norm(mat), 1e-12)
    return DapParams(mat, d_x, R_M=max(1.0, R_M))


def test_criterion_01_representation_oracle():
    start = time.time()
    rng = make_rng(101)
    worst = 0.0
    for _ in range(100):
        H = int(rng.choice([1, 2, 4]))
        d_x = int(rng.integers(1, 4))
        d_u = int(rng.integers(1, 4))
        M = _random_dap(rng, H, d_x, d_u, R_M=2.0)
        win = _random_window(rng, H, d_x, W=1.0)
        # independent oracle: build each stacked block from its definition
        buf = win.buf
        parts = []
        for s in range(H):
            u = np.zeros(d_u)
            for h in range(1, H + 1):
                u += M.blocks[h - 1] @ buf[H + 1 + s - h]
            parts.append(u)
        for s in range(H - 1):
            parts.append(buf[H + 1 + s])
        direct = np.concatenate(parts)
        worst = max(worst, float(np.abs(rho(M, win) - direct).max()))
    elapsed = time.time() - start
    assert worst <= 1e-12
    assert elapsed < 1.0
    print(f"criterion 1: PASS rho/build_P agree, max abs err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_norm_bound_suite():
    start = time.time()
    rng = make_rng(102)
    W, R_M = 1.0, 2.0
    d_x = d_u = 2
    A = np.diag([0.5, 0.2])
    B = np.eye(2)
    sys2 = LinearSystem(A, B, NoiseModel.custom_bounded("uniform_ball", 2, W))
    cert = certify_strong_stability(np.zeros((2, 2)), sys2)
    R_B = max(1.0, float(np.linalg.norm(B, 2)))
    n_per_item = 10_000
    violations = [0] * 5
    psi_by_H = {H: build_psi_star(A, B, H) for H in (1, 2, 3, 4)}
    for i in range(n_per_item):
        H = (1, 2, 3, 4)[i % 4]
        M = _random_dap(rng, H, d_x, d_u, R_M)
        win = _random_window(rng, H, d_x, W)
        win2 = _random_window(rng, H, d_x, W)
        w_t = rng.standard_normal(d_x)
        w_t *= W * rng.random() / max(np.linalg.norm(w_t), 1e-12)
        u = control_action(M, win)
        if np.linalg.norm(u) > W * R_M * math.sqrt(H) + 1e-12:
            violations[0] += 1
        r = rho(M, win)
        if math.hypot(np.linalg.norm(r), np.linalg.norm(w_t)) > math.sqrt(2) * W * R_M * H + 1e-12:
            violations[1] += 1
        x = x_trunc(M, psi_by_H[H], win)
        if np.linalg.norm(x) > 2 * cert.kappa * R_B * W * R_M * math.sqrt(H) / cert.gamma + 1e-12:
            violations[2] += 1
        du = np.linalg.norm(control_action(M, win) - control_action(M, win2))
        if du > R_M * np.linalg.norm(win.recent(H) - win2.recent(H)) + 1e-12:
            violations[3] += 1
        dr = np.linalg.norm(rho(M, win) - rho(M, win2))
        w_t2 = rng.standard_normal(d_x)
        w_t2 *= W * rng.random() / max(np.linalg.norm(w_t2), 1e-12)
        lhs = math.hypot(dr, np.linalg.norm(w_t - w_t2))
        full = np.concatenate([win.buf[1:], w_t[None]])
        full2 = np.concatenate([win2.buf[1:], w_t2[None]])
        if lhs > R_M * math.sqrt(H) * np.linalg.norm(full - full2) + 1e-12:
            violations[4] += 1
    elapsed = time.time() - start
    assert violations == [0] * 5, violations
    assert elapsed < 10.0
    print(f"criterion 2: PASS norm-bound suite items 2-6, 0/{5 * n_per_item} violations, {elapsed:.1f}s")


def test_criterion_03_gradient_checks():
    start = time.time()
    rng = make_rng(103)
    worst_ctrl = 0.0
    for _ in range(200):
        H = int(rng.choice([1, 2]))
        d_x = int(rng.integers(1, 3))
        d_u = int(rng.integers(1, 3))
        dpsi = d_psi(H, d_x, d_u)
        cols = (2 * H - 1) * d_x
        Psi = rng.standard_normal((d_x, dpsi))
        Z = rng.standard_normal((dpsi, dpsi))
        V = Z @ Z.T + 1.5 * np.eye(dpsi)
        Zs = rng.standard_normal((d_x, d_x))
        sigma_sqrt = Zs @ Zs.T + 0.5 * np.eye(d_x)
        win = _random_window(rng, H, d_x, 1.0)
        M = 0.6 * rng.standard_normal((d_u, H * d_x))
        p = default_params(1.0, 0.5, 1.0, 1.0, 1.0, d_x, d_u, T=64, delta=0.1, H=H)
        p.alpha = float(rng.uniform(0.2, 1.5))
        key = ExpertKey(int(rng.integers(0, dpsi)), int(rng.integers(0, cols)),
                        int(rng.choice([-1, 1])))
        cost = QuadraticClippedOracle(
            0.8 * np.eye(d_x), 0.6 * np.eye(d_u), 60.0  # smooth inside a huge ball
        )
        _, grad = expert_loss_and_grad(M, key, cost, Psi, V, win, p, sigma_sqrt=sigma_sqrt)
        eps = 1e-6
        fd = np.zeros_like(M)
        for a in range(d_u):
            for b in range(H * d_x):
                up = M.copy(); up[a, b] += eps
                dn = M.copy(); dn[a, b] -= eps
                v_up, _ = expert_loss_and_grad(up, key, cost, Psi, V, win, p, sigma_sqrt=sigma_sqrt)
                v_dn, _ = expert_loss_and_grad(dn, key, cost, Psi, V, win, p, sigma_sqrt=sigma_sqrt)
                fd[a, b] = (v_up - v_dn) / (2 * eps)
        rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-10)
        worst_ctrl = max(worst_ctrl, rel)
    worst_hlt = 0.0
    for _ in range(200):
        d_a = int(rng.integers(1, 4))
        d_y = int(rng.integers(1, 4))
        Qhat = rng.standard_normal((d_y, d_a))
        Z = rng.standard_normal((d_a, d_a))
        V = Z @ Z.T + 1.2 * np.eye(d_a)
        a_pt = rng.standard_normal(d_a)
        target = rng.standard_normal(d_y)

        class Smooth:
            def evaluate(self, y):
                return float(np.sum((y - target) ** 2))

            def subgradient(self, y):
                return 2.0 * (y - target)

        k = int(rng.integers(0, d_a))
        chi = int(rng.choice([-1, 1]))
        alpha = float(rng.uniform(0.2, 1.5))
        _, grad = optimistic_expert_loss(a_pt, k, chi, Smooth(), Qhat, V, alpha)
        eps = 1e-6
        fd = np.zeros(d_a)
        for i in range(d_a):
            up = a_pt.copy(); up[i] += eps
            dn = a_pt.copy(); dn[i] -= eps
            fd[i] = (
                optimistic_expert_loss(up, k, chi, Smooth(), Qhat, V, alpha)[0]
                - optimistic_expert_loss(dn, k, chi, Smooth(), Qhat, V, alpha)[0]
            ) / (2 * eps)
        rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-10)
        worst_hlt = max(worst_hlt, rel)
    elapsed = time.time() - start
    assert worst_ctrl <= 1e-5
    assert worst_hlt <= 1e-5
    assert elapsed < 30.0
    print(
        "criterion 3: PASS gradients vs central differences, "
        f"worst rel err {max(worst_ctrl, worst_hlt):.2e}, {elapsed:.1f}s"
    )


# Epoch counts observed by the criterion-6/9/11 runs, checked in criterion 4.
_EPOCH_LOG: list[tuple[str, int, float]] = []


def _log_epochs(kind: str, epochs: int, bound: float):
    _EPOCH_LOG.append((kind, epochs, bound))
    assert epochs <= bound, f"{kind}: {epochs} epochs exceeds bound {bound:.1f}"


def test_criterion_05_harmonic_sum_oracle():
    start = time.time()
    rng = make_rng(105)
    for _ in range(50):
        d = int(rng.integers(1, 6))
        T = int(rng.choice([16, 64, 256, 1024, 4096]))
        lam = float(rng.uniform(0.5, 4.0))
        V = lam * np.eye(d)
        total = 0.0
        draws = rng.standard_normal((T, d))
        norms = np.linalg.norm(draws, axis=1, keepdims=True)
        draws *= math.sqrt(lam) * rng.random((T, 1)) / np.maximum(norms, 1e-12)
        for a in draws:
            total += float(a @ np.linalg.solve(V, a))
            V += np.outer(a, a)
        assert total <= 5 * d * math.log(T)
    elapsed = time.time() - start
    print(f"criterion 5: PASS harmonic sums within 5 d log T, {elapsed:.1f}s")


def _alg2_run(seed, T=2000, collect_probes=False):
    Q_star = np.array([[1.0, 0.3], [-0.2, 0.8]])
    noise = NoiseModel.custom_bounded("uniform_ball", 2, 0.5)
    p = hlt_params(2.0, 2.0, noise.W, 2, 2, T, 0.05)
    sched = LossSchedule("fixed_target", {"target": [0.65, -0.38]}, 2)
    tape = sample_noise(noise, make_rng(90_000 + seed), size=T)
    learner = Alg2Learner(p, make_rng(seed))
    max_scaled_err = 0.0
    probes = []
    probe_rng = make_rng(70_000 + seed)
    probe_times = set(np.linspace(10, T - 1, 8, dtype=int).tolist())
    for t in range(1, T + 1):
        a, _ = learner.act()
        y = Q_star @ a + tape[t - 1]
        learner.observe(y, sched.at(t))
        ridge = ridge_transform(learner.gram.V, learner.moment_ya)
        delta = ridge - Q_star
        err_sq = float(np.linalg.eigvalsh(delta @ learner.gram.V @ delta.T).max())
        max_scaled_err = max(max_scaled_err, math.sqrt(2.0 * err_sq))
        if collect_probes and t in probe_times:
            pts = probe_rng.standard_normal((125, 2))
            pts *= (p.R_a / 2.0) * probe_rng.random((125, 1)) / np.linalg.norm(pts, axis=1, keepdims=True)
            probes.append((learner.Qhat.copy(), learner.V_epoch.copy(),
                           learner.v_epoch_inv_sqrt.copy(), sched.at(t), pts))
    event = max_scaled_err <= p.alpha
    _log_epochs("alg2", learner.epoch, 2 * 2 * math.log(T))
    return event, probes, Q_star, p


def _alg1_disturbance_run(seed, T=150):
    noise = NoiseModel.custom_bounded("uniform_ball", 1, 1.0)
    sys1 = LinearSystem([[0.0]], [[1.0]], noise)
    cert = certify_strong_stability(np.zeros((1, 1)), sys1)
    params = default_params(cert.kappa, cert.gamma, 1.0, 1.0, 1.0, 1, 1, T=T, delta=0.05)
    assert params.H > math.log(T)  # precondition of the disturbance-estimation bound
    sched = CostSchedule("drifting_target_l1", {"amplitude": 0.3, "period": 40}, 1, 1)
    tape = sample_noise(noise, make_rng(80_000 + seed), size=T)
    ctl = Alg1Controller(1, 1, params, noise, make_rng(seed))
    x = np.zeros(1)
    sq_err = 0.0
    for t in range(1, T + 1):
        u = ctl.act(x)
        x_next = sys1.A @ x + sys1.B @ u + tape[t - 1]
        ctl.observe(x_next, sched.at(t))
        sq_err += float(np.sum((tape[t - 1] - ctl.last_w_hat) ** 2))
        x = x_next
    C_w = (
        10.0 * params.W * params.kappa * params.R_M * params.R_B / params.gamma
        * math.sqrt(params.H * 2 * (params.kappa**2 + params.R_B**2) * math.log(T / 0.05))
    )
    _log_epochs("alg1", ctl.epoch, 2 * 2 * params.H * math.log(T))
    return math.sqrt(sq_err) <= C_w, math.sqrt(sq_err), C_w


_CRIT6_CACHE = {}


def test_criterion_06_estimation_events():
    start = time.time()
    alg2_events = []
    probes_by_run = []
    for seed in range(200):
        event, probes, Q_star, p = _alg2_run(seed, collect_probes=seed < 40)
        alg2_events.append(event)
        if probes:
            probes_by_run.append((event, probes, Q_star, p))
    frac2 = float(np.mean(alg2_events))
    alg1_events = []
    ratios = []
    for seed in range(50):
        ok, actual, bound = _alg1_disturbance_run(seed)
        alg1_events.append(ok)
        ratios.append(actual / bound)
    frac1 = float(np.mean(alg1_events))
    elapsed = time.time() - start
    _CRIT6_CACHE["probes"] = probes_by_run
    assert frac2 >= 0.95
    assert frac1 >= 0.95
    assert elapsed < 300.0
    print(
        "criterion 6: PASS estimation events "
        f"(alg2 {frac2:.1%} of 200 seeds, alg1 disturbance {frac1:.1%} of 50 seeds, "
        f"max err/bound {max(ratios):.3f}), {elapsed:.0f}s"
    )


def test_criterion_07_optimism_sandwich():
    if "probes" not in _CRIT6_CACHE:
        pytest.skip("criterion 6 must run first")
    checked = 0
    violations = 0
    for event, probes, Q_star, p in _CRIT6_CACHE["probes"]:
        if not event:
            continue
        for Qhat, V_epoch, v_inv_sqrt, loss, pts in probes:
            proj = pts @ v_inv_sqrt.T  # rows are V^{-1/2} a
            bonus = np.abs(proj).max(axis=1)
            lbar = loss.evaluate_batch(pts @ Qhat.T) - p.alpha * bonus
            truth = loss.evaluate_batch(pts @ Q_star.T)
            slack = 2.0 * p.alpha * np.sqrt(
                np.einsum("ij,ij->i", pts, np.linalg.solve(V_epoch, pts.T).T)
            )
            violations += int(np.sum(lbar > truth + 1e-9))
            violations += int(np.sum(truth > lbar + slack + 1e-9))
            checked += pts.shape[0]
    assert checked >= 1000
    assert violations == 0
    print(f"criterion 7: PASS optimism sandwich on {checked} probes, 0 violations")


def test_criterion_08_bfpl_thresholds():
    start = time.time()
    T = 10_000
    delta = 0.05
    results = []
    for n in (4, 16):
        bound = 135.0 * math.sqrt(T * math.log(n) * math.log(2.0 / delta))
        regret_bound = 150.0 * math.sqrt(T * math.log(n) * math.log(2.0 / delta))
        ok = 0
        max_switches = 0
        max_regret = -math.inf
        for seed in range(200):
            loss_rng = make_rng(50_000 + seed)
            means = loss_rng.uniform(0.3, 0.7, n)
            losses = np.clip(loss_rng.normal(means, 0.15, size=(T, n)), 0.0, 1.0)
            state = BfplState.create(n, T, delta, make_rng(seed))
            realized = 0.0
            for t in range(T):
                idx, _ = bfpl_step(state, losses[t])
                realized += losses[t, idx]
            regret = realized - losses.sum(axis=0).min()
            max_switches = max(max_switches, state.total_switches)
            max_regret = max(max_regret, regret)
            ok += int(state.total_switches <= bound and regret <= regret_bound)
        results.append((n, ok / 200.0, max_switches, bound, max_regret, regret_bound))
        assert ok / 200.0 >= 1.0 - delta
    elapsed = time.time() - start
    for n, frac, msw, bound, mreg, rbound in results:
        print(
            f"criterion 8: PASS n={n} fraction {frac:.1%} "
            f"(max switches {msw} <= {bound:.0f}, max regret {mreg:.1f} <= {rbound:.0f})"
        )
    print(f"criterion 8: total {elapsed:.0f}s")


def test_criterion_09_alg2_sublinearity():
    start = time.time()
    horizons = (1000, 4000, 16000)
    means = []
    for T in horizons:
        regs = []
        for seed in range(10):
            raw = {
                "algorithm": "alg2", "T": T, "delta": 0.05, "seed": seed,
                "hlt": {
                    "Q_star": [[1.0, 0.3], [-0.2, 0.8]],
                    "R_a": 2.0, "R_Q": 2.0,
                    "noise": {"kind": "custom_bounded", "name": "uniform_ball", "W": 0.5},
                    "losses": {"kind": "fixed_target", "target": [0.65, -0.38]},
                    "alpha_scale": 0.01,
                },
                "comparators": [{"name": "best_fixed_action", "budget": 500}],
            }
            out = tempfile.mkdtemp(prefix=f"acc9_{T}_{seed}_")
            _, sp = run_experiment(ExperimentConfig.from_dict(raw), out_dir=out)
            summary = json.load(open(sp))
            regs.append(summary["regret"]["best_fixed_action"])
            _log_epochs("alg2", summary["epochs"], 2 * 2 * math.log(T))
        assert min(regs) > 0.0
        means.append(float(np.mean(regs)))
    rates = [m / T for m, T in zip(means, horizons)]
    assert rates[0] > rates[1] > rates[2], rates
    slope = float(np.polyfit(np.log(horizons), np.log(means), 1)[0])
    elapsed = time.time() - start
    assert slope <= 0.85
    assert elapsed < 600.0
    print(
        "criterion 9: PASS mean regret/T "
        f"{rates[0]:.4f} > {rates[1]:.4f} > {rates[2]:.4f}, log-log slope {slope:.2f}, {elapsed:.0f}s"
    )


@pytest.mark.parametrize("system_kind", ["scalar", "twod"])
def test_criterion_10_reduction_equivalence(system_kind, tmp_path):
    noise_dim = 1 if system_kind == "scalar" else 2
    noise = NoiseModel.custom_bounded("uniform_ball", noise_dim, 1.0)
    if system_kind == "scalar":
        base = LinearSystem([[2.0]], [[1.0]], noise)
        K0 = np.array([[-1.5]])
    else:
        base = LinearSystem([[1.2, 0.4], [0.0, 1.1]], np.eye(2), noise)
        K0 = np.array([[-0.75, -0.4], [0.0, -0.65]])
    cert = certify_strong_stability(K0, base)
    T = 50
    params = default_params(cert.kappa, cert.gamma, 1.0, 1.0,
                            max(1.0, float(np.linalg.norm(base.B, 2))),
                            base.d_x, base.d_u, T=T, delta=0.1, alpha_scale=1e-2, H=2)
    schedule = CostSchedule("drifting_target_l1", {"amplitude": 0.4, "period": 20}, base.d_x, base.d_u)
    for seed in range(20):
        tape = sample_noise(noise, make_rng(30_000 + seed), size=T)

        def run_wrapped():
            inner = Alg1Controller(base.d_x, base.d_u, params, noise, make_rng(seed))
            wrapped = wrap_stabilize(inner, K0, cert.kappa)
            records = []
            x = np.zeros(base.d_x)
            cum = 0.0
            for t in range(1, T + 1):
                u = wrapped.act(x)
                u_inner = wrapped.last_inner_action
                c_t = TransformedCostOracle(schedule.at(t), K0, cert.kappa)
                value = float(c_t.evaluate(x, u_inner))
                cum += value
                records.append(TraceRecord(t, x.copy(), np.atleast_1d(u_inner).copy(),
                                           value, 0, -1, 0, 0.0, 0.0, cum))
                x_next = base.A @ x + base.B @ u + tape[t - 1]
                wrapped.observe(x_next, schedule.at(t))
                x = x_next
            return records

        def run_direct():
            inner = Alg1Controller(base.d_x, base.d_u, params, noise, make_rng(seed))
            closed = ClosedLoopSystem(base, K0)
            records = []
            x = np.zeros(base.d_x)
            cum = 0.0
            for t in range(1, T + 1):
                u_tilde = inner.act(x)
                c_t = TransformedCostOracle(schedule.at(t), K0, cert.kappa)
                value = float(c_t.evaluate(x, u_tilde))
                cum += value
                records.append(TraceRecord(t, x.copy(), np.atleast_1d(u_tilde).copy(),
                                           value, 0, -1, 0, 0.0, 0.0, cum))
                x = closed.step_with_noise(x, u_tilde, tape[t - 1])
                inner.observe(x, c_t)
            return records

        path_a = str(tmp_path / f"wrapped_{system_kind}_{seed}.csv")
        path_b = str(tmp_path / f"direct_{system_kind}_{seed}.csv")
        write_trace_csv(path_a, run_wrapped(), base.d_x, base.d_u)
        write_trace_csv(path_b, run_direct(), base.d_x, base.d_u)
        assert open(path_a, "rb").read() == open(path_b, "rb").read()
    print(f"criterion 10: PASS byte-identical reduction traces, {system_kind} system, 20 seeds")


def test_criterion_11_alg1_end_to_end():
    start = time.time()
    config = {
        "delta": 0.05,
        "system": {"A": [[0.0]], "B": [[1.0]]},
        "noise": {"kind": "custom_bounded", "name": "uniform_ball", "W": 0.25},
        "costs": {"kind": "fixed_quadratic", "Q": [[1.0]], "R": [[0.5]], "r_max": 2.0},
        "params": {"H": 1, "alpha_scale": 0.01},
        "comparators": [{"name": "best_dap", "budget": 150, "restarts": 4}],
    }
    regret = {500: {}, 2000: {}}
    for T in (500, 2000):
        for seed in range(10):
            per_alg = {}
            for alg in ("alg1", "explore_exploit"):
                raw = dict(config)
                raw.update({"algorithm": alg, "T": T, "seed": seed})
                out = tempfile.mkdtemp(prefix=f"acc11_{alg}_{T}_{seed}_")
                _, sp = run_experiment(ExperimentConfig.from_dict(raw), out_dir=out)
                summary = json.load(open(sp))
                per_alg[alg] = summary["regret"]["best_dap"]
                if alg == "alg1":
                    _log_epochs("alg1", summary["epochs"],
                                2 * 2 * summary["params_used"]["H"] * math.log(T))
            regret[T][seed] = per_alg
    wins = sum(
        regret[2000][s]["alg1"] < regret[2000][s]["explore_exploit"] for s in range(10)
    )
    mono_fails = [
        s for s in range(10)
        if regret[2000][s]["alg1"] / 2000 >= regret[500][s]["alg1"] / 500
    ]
    elapsed = time.time() - start
    assert wins >= 7, f"alg1 beat the baseline on only {wins}/10 seeds"
    assert not mono_fails, f"regret/T failed to shrink on seeds {mono_fails}"
    assert elapsed < 600.0
    print(
        f"criterion 11: PASS alg1 < explore-exploit on {wins}/10 seeds; "
        f"regret/T shrank from T=500 to T=2000 on 10/10 seeds; {elapsed:.0f}s"
    )


def test_criterion_04_epoch_bounds():
    # every run logged by criteria 6, 9, and 11 stayed within its epoch bound
    # (each log call asserts its own bound); add dedicated runs when the suite
    # is filtered down to this test alone
    if not _EPOCH_LOG:
        _alg2_run(seed=0, T=500)
        _alg1_disturbance_run(seed=0, T=150)
    worst = max(e / b for _, e, b in _EPOCH_LOG)
    print(
        f"criterion 4: PASS epoch bounds on {len(_EPOCH_LOG)} runs, "
        f"worst epochs/bound ratio {worst:.2f}"
    )
