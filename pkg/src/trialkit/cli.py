"""Command-line front end: a validated TOML config in, JSON/CSV reports
and figures out.

Exit codes: 0 success, 2 validation error, 3 numerical failure or a
failed --check verification, 4 precondition warnings elevated by
--strict. Errors print one JSON object {"error", "reason", "message"}
on stderr; nothing is written before validation passes.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._roots import golden_max
from .config import _TASK_FIELDS, RunConfig, load_config, parse_config
from .errors import BracketingError, BudgetExceeded, ConfigError, TrialkitError
from .extensions import (
    ExtendedParams,
    bad_news_mechanism,
    cancellable_trial,
    infinite_horizon_trial,
    mixed_news_mechanism,
)
from .frontier import (
    d1_payoffs,
    default_weight_grid,
    frontier_rows,
    intuitive_criterion_equivalent,
    is_equilibrium_payoff,
    trace_frontier,
)
from .mechanism import check_ic, from_trial
from .oracle import discrete_relaxed_oracle, search_optimal_control
from .simulate import SimConfig, simulate_game
from .tiered import freemium_mechanism, solve_tiered, to_direct, welfare_compare
from .trial import free_trial, solve_trial, weight_cap

_FRONTIER_HEADER = ("wl", "t0", "v0", "p0", "pi_L", "pi_H", "label")
_WELFARE_HEADER = ("mu0", "free_trial_frac", "freemium_frac")
_REFUND_HEADER = ("t", "delta")


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _round12(obj):
    """12-significant-digit floats; non-finite values become strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return float(_fmt(obj)) if math.isfinite(obj) else _fmt(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.floating):
        return _round12(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round12(obj.tolist())
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_round12(payload), indent=2) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row)
        )
    path.write_text("\n".join(lines) + "\n")


def _png(render_fn, *args):
    def render(path: Path) -> None:
        render_fn(*args, path)

    return render


def _mechanism_png(mech, params, mu0):
    from .figures import mechanism_figure

    return _png(mechanism_figure, mech, params, mu0)


def _ic_section(mech, cfg: RunConfig):
    params, dist = cfg.params(), cfg.distribution()
    report = check_ic(mech, dist, params, cfg.mu0)
    return json.loads(report.to_json()), report.passed


def _build_direct(cfg: RunConfig, family: str):
    """Direct mechanism for the check/simulate tasks, with analytic payoffs
    where the solver provides them."""
    params, dist = cfg.params(), cfg.distribution()
    wl = cfg.args["wl"]
    warnings: list[str] = []
    if family == "trial":
        rep = solve_trial(params, dist, wl)
        return from_trial(rep.mechanism, params), (rep.payoff_L, rep.payoff_H), warnings
    if family == "tiered":
        rep = solve_tiered(params, dist, wl, cfg.args["screening"])
        if not rep.horizon_ok:
            warnings.append(
                "horizon condition fails: the tiered reduction is unverified here"
            )
        return to_direct(rep.mechanism), (rep.payoff_L, rep.payoff_H), warnings
    return freemium_mechanism(params, dist), None, warnings


def _task_solve(cfg: RunConfig, do_check: bool):
    params, dist = cfg.params(), cfg.distribution()
    rep = solve_trial(params, dist, cfg.args["wl"], selection=cfg.args["selection"])
    mech = rep.mechanism
    payload = {
        "task": "solve",
        "wl": rep.wl,
        "v0": mech.v0,
        "t0": mech.t0,
        "p0": mech.p0,
        "post_trial_price": mech.post_trial_price,
        "pi0": rep.pi0,
        "pi_L": rep.payoff_L,
        "pi_H": rep.payoff_H,
        "objective": rep.objective,
        "boundary_case": rep.boundary_case,
    }
    if rep.price_interval is not None:
        pi = rep.price_interval
        payload["price_interval"] = {"lo": pi.lo, "hi": pi.hi, "selected": pi.selected}
    failed = False
    direct = from_trial(mech, params)
    if do_check:
        ic, ic_ok = _ic_section(direct, cfg)
        _, scan_val = search_optimal_control(params, rep.pi0, cfg.mu0, rep.wl, 400)
        rel = abs(scan_val - rep.objective) / max(abs(rep.objective), 1e-12)
        ok = ic_ok and rel <= 1e-3 and scan_val <= rep.objective + 1e-9
        payload["check"] = {
            "ic": ic,
            "control_scan_value": scan_val,
            "control_scan_rel_gap": rel,
            "passed": ok,
        }
        failed = not ok
    artifacts = [
        ("solve.json", "json", payload),
        ("mechanism.png", "png", _mechanism_png(direct, params, cfg.mu0)),
    ]
    return artifacts, [], failed


def _task_free_trial(cfg: RunConfig, do_check: bool):
    params, dist = cfg.params(), cfg.distribution()
    t_M, v_M, pi_F = free_trial(params, dist)
    payload = {"task": "free-trial", "t_M": t_M, "v_M": v_M, "pi_F": pi_F}
    failed = False
    if do_check:
        rep = solve_trial(params, dist, -1.0)
        gap_t = abs(rep.mechanism.t0 - t_M)
        gap_v = abs(rep.mechanism.v0 - v_M)
        gap_pi = abs((rep.payoff_H - rep.payoff_L) - pi_F)
        ok = max(gap_t, gap_v, gap_pi) <= 1e-8
        payload["check"] = {
            "t0_gap": gap_t,
            "v0_gap": gap_v,
            "payoff_split_gap": gap_pi,
            "passed": ok,
        }
        failed = not ok
    from .trial import make_trial

    direct = from_trial(make_trial(0.0, t_M, v_M, params), params)
    artifacts = [
        ("free_trial.json", "json", payload),
        ("mechanism.png", "png", _mechanism_png(direct, params, cfg.mu0)),
    ]
    return artifacts, [], failed


def _task_frontier(cfg: RunConfig, do_check: bool):
    params, dist = cfg.params(), cfg.distribution()
    weights = cfg.args["weights"]
    if weights is None:
        weights = default_weight_grid(cfg.mu0, cfg.args["grid"])
    points = trace_frontier(params, dist, weights)
    rows = frontier_rows(points)
    d1 = d1_payoffs(params, dist)
    payload = {
        "task": "frontier",
        "points": len(rows),
        "weight_cap": weight_cap(cfg.mu0),
        "intuitive_criterion_equivalent": intuitive_criterion_equivalent(
            dist, cfg.mu0
        ),
        "d1": {
            "t_M": d1.t_M,
            "v_M": d1.v_M,
            "pi_L_D": d1.pi_L_D,
            "point_D": [d1.point_D.pi_L, d1.point_D.pi_H],
            "point_F": [d1.point_F.pi_L, d1.point_F.pi_H],
        },
    }
    failed = False
    if do_check:
        t0s = [row[1] for row in rows]
        monotone = all(b - a >= -1e-8 for a, b in zip(t0s, t0s[1:]))
        sampled = points[:: max(1, len(points) // 5)]
        member = [is_equilibrium_payoff(pt, params, dist) for pt in sampled]
        ok = monotone and all(member)
        payload["check"] = {
            "t0_monotone": monotone,
            "membership_checked": len(sampled),
            "membership_ok": all(member),
            "passed": ok,
        }
        failed = not ok
    artifacts = [
        ("frontier.json", "json", payload),
        ("frontier.csv", "csv", (_FRONTIER_HEADER, rows)),
        ("frontier.png", "png", _frontier_png(rows, d1)),
    ]
    return artifacts, [], failed


def _frontier_png(rows, d1):
    from .figures import frontier_figure

    return _png(frontier_figure, rows, d1)


def _task_check(cfg: RunConfig, do_check: bool):
    params = cfg.params()
    family = cfg.args["family"]
    mech, _, warnings = _build_direct(cfg, family)
    ic, passed = _ic_section(mech, cfg)
    payload = {"task": "check", "family": family, "wl": cfg.args["wl"], **ic}
    artifacts = [
        ("check.json", "json", payload),
        ("mechanism.png", "png", _mechanism_png(mech, params, cfg.mu0)),
    ]
    return artifacts, warnings, not passed


def _task_simulate(cfg: RunConfig, do_check: bool):
    params, dist = cfg.params(), cfg.distribution()
    family = cfg.args["family"]
    mech, analytic, warnings = _build_direct(cfg, family)
    sim_cfg = SimConfig(
        paths=cfg.args["paths"],
        seed=cfg.args["seed"],
        antithetic=cfg.args["antithetic"],
    )
    rep = simulate_game(mech, params, dist, sim_cfg)
    payload = {"task": "simulate", "family": family, "wl": cfg.args["wl"]}
    payload.update(json.loads(rep.to_json()))
    failed = False
    if analytic is not None:
        pi_L, pi_H = analytic
        expected = (1.0 - cfg.mu0) * pi_L + cfg.mu0 * pi_H
        z = (rep.revenue_mean - expected) / rep.revenue_se if rep.revenue_se else 0.0
        payload["analytic"] = {"pi_L": pi_L, "pi_H": pi_H, "revenue_mean": expected}
        payload["revenue_z"] = z
        if do_check:
            buyer_ok = True
            if cfg.args["wl"] > -1.0:
                buyer_ok = abs(rep.buyer_mean) <= 4.0 * rep.buyer_se + 1e-12
            ok = abs(z) <= 4.0 and rep.conservation_gap <= 1e-9 and buyer_ok
            payload["check"] = {
                "revenue_z": z,
                "conservation_gap": rep.conservation_gap,
                "buyer_surplus_zero": buyer_ok,
                "passed": ok,
            }
            failed = not ok
    elif do_check:
        ok = rep.conservation_gap <= 1e-9 and rep.buyer_mean >= -4.0 * rep.buyer_se
        payload["check"] = {
            "conservation_gap": rep.conservation_gap,
            "buyer_surplus_nonnegative": rep.buyer_mean >= -4.0 * rep.buyer_se,
            "passed": ok,
        }
        failed = not ok
    artifacts = [("simulate.json", "json", payload)]
    return artifacts, warnings, failed


def _task_oracle(cfg: RunConfig, do_check: bool):
    params, dist = cfg.params(), cfg.distribution()
    wl = cfg.args["wl"]
    rep = discrete_relaxed_oracle(
        params,
        dist,
        cfg.mu0,
        wl,
        K=cfg.args["bins"],
        M=cfg.args["value_points"],
        mode=cfg.args["mode"],
    )
    solved = solve_trial(params, dist, wl)
    payload = {"task": "oracle", "wl": wl, **json.loads(rep.to_json())}
    payload["solver"] = {"t0": solved.mechanism.t0, "v0": solved.mechanism.v0}
    failed = False
    if do_check:
        lattice_t0 = sum(rep.pattern) * rep.bin_width
        t_ok = abs(lattice_t0 - solved.mechanism.t0) <= rep.bin_width + 1e-9
        v_ok = (
            abs(rep.thresholds[0] - solved.mechanism.v0) <= rep.value_step + 1e-9
            if rep.thresholds
            else lattice_t0 == 0.0
        )
        ok = rep.gap >= -1e-9 and t_ok and v_ok
        payload["check"] = {
            "gap_nonnegative": rep.gap >= -1e-9,
            "t0_within_bin": t_ok,
            "v0_within_step": v_ok,
            "passed": ok,
        }
        failed = not ok
    return [("oracle.json", "json", payload)], [], failed


def _task_tiered(cfg: RunConfig, do_check: bool):
    params, dist = cfg.params(), cfg.distribution()
    rep = solve_tiered(params, dist, cfg.args["wl"], cfg.args["screening"])
    mech = rep.mechanism
    payload = {
        "task": "tiered",
        "wl": rep.wl,
        "v0": mech.v0,
        "p0": mech.p0,
        "pi0": rep.pi0,
        "mu_L": rep.mu_L,
        "pi_L": rep.payoff_L,
        "pi_H": rep.payoff_H,
        "objective": rep.objective,
        "horizon_ok": rep.horizon_ok,
        "budget_path": [
            {"start": start, "intensity": opt[0], "quality": opt[1]}
            for start, opt in mech.budget_path
        ],
        "switches": [start for start, _ in mech.budget_path[1:]],
    }
    warnings = []
    if not rep.horizon_ok:
        warnings.append(
            "horizon condition fails: the tiered reduction is unverified here"
        )
    failed = False
    direct = to_direct(mech)
    if do_check:
        ic, ic_ok = _ic_section(direct, cfg)
        payload["check"] = {"ic": ic, "passed": ic_ok}
        failed = not ic_ok
    artifacts = [
        ("tiered.json", "json", payload),
        ("mechanism.png", "png", _mechanism_png(direct, params, cfg.mu0)),
    ]
    return artifacts, warnings, failed


def _task_welfare(cfg: RunConfig, do_check: bool):
    params, dist = cfg.params(), cfg.distribution()
    grid = cfg.args["mu0_values"]
    if grid is None:
        grid = np.linspace(0.05, 0.95, 19)
    rows = welfare_compare(params, dist, grid)
    payload = {
        "task": "welfare",
        "rows": len(rows),
        "free_trial_min": min(row[1] for row in rows),
        "freemium_min": min(row[2] for row in rows),
    }
    failed = False
    if do_check:
        ordered = all(row[1] >= row[2] - 1e-12 for row in rows)
        bounded = all(-1e-9 <= row[i] <= 1.0 + 1e-9 for row in rows for i in (1, 2))
        ok = ordered and bounded
        payload["check"] = {
            "free_trial_dominates": ordered,
            "fractions_bounded": bounded,
            "passed": ok,
        }
        failed = not ok
    artifacts = [
        ("welfare.json", "json", payload),
        ("welfare.csv", "csv", (_WELFARE_HEADER, rows)),
        ("welfare.png", "png", _welfare_png(rows)),
    ]
    return artifacts, [], failed


def _welfare_png(rows):
    from .figures import welfare_figure

    return _png(welfare_figure, rows)


def _refunds_png(schedules):
    from .figures import refunds_figure

    return _png(refunds_figure, schedules)


def _discounted_value(s, lam, r, mu0, wl, dist, v0):
    """Weighted discounted payoff of a length-s trial (verifier for the
    closed-form stopping time)."""
    g1 = dist.excess_above(v0)
    p_u = mu0 * (lam / r) * (
        -math.expm1(-r * s) + g1 * math.exp(-r * s) * -math.expm1(-lam * s)
    )
    upgrade = (
        (lam * v0 / r)
        * (1.0 - float(dist.cdf(v0)))
        * math.exp(-r * s)
        * -math.expm1(-lam * s)
    )
    return (1.0 + max(wl, -1.0)) * p_u + upgrade


def _task_extension(cfg: RunConfig, do_check: bool):
    dist = cfg.distribution()
    which = cfg.args["which"]
    wl = cfg.args["wl"]
    warnings: list[str] = []
    failed = False
    artifacts: list = []

    if which == "infinite-horizon":
        rep = infinite_horizon_trial(cfg.lam, cfg.r, cfg.mu0, wl, dist)
        payload = {
            "task": "extension",
            "which": which,
            "wl": wl,
            "v0": rep.v0,
            "pi0": rep.pi0,
            "t0": rep.t0,
            "p_uninformed": rep.p_uninformed,
            "upgrade_price": rep.upgrade_price,
        }
        if do_check:
            if math.isfinite(rep.t0):
                hat = golden_max(
                    lambda s: _discounted_value(
                        s, cfg.lam, cfg.r, cfg.mu0, wl, dist, rep.v0
                    ),
                    0.0,
                    max(4.0 * rep.t0, 1.0),
                    tol=1e-10,
                )
                gap = abs(hat - rep.t0)
                ok = gap <= 1e-4
            else:
                gap = 0.0
                ok = cfg.mu0 * max(1.0 + wl, 0.0) >= rep.pi0
            payload["check"] = {"argmax_gap": gap, "passed": ok}
            failed = not ok
        artifacts.append(("extension.json", "json", payload))

    elif which == "cancellable":
        params = cfg.params()
        ext = ExtendedParams(
            u=cfg.args["u"],
            c=cfg.args["c"],
            mu_H=cfg.args["mu_H"],
            mu_L=cfg.args["mu_L"],
            p_H=cfg.args["p_H"],
            p_L=cfg.args["p_L"],
        )
        rep = cancellable_trial(params, ext, dist, wl)
        payload = {
            "task": "extension",
            "which": which,
            "wl": wl,
            "cancel_threshold": rep.cancel_threshold,
            "v0": rep.v0,
            "t0": rep.t0,
            "pi_premium": rep.pi_premium,
            "pi_cancel": rep.pi_cancel,
            "cancel_all": rep.cancel_all,
        }
        if rep.cancel_all:
            warnings.append("every learned value cancels: c >= u + lam * support_hi")
        if do_check:
            wl_eff = max(wl, -1.0)
            b2 = ext.mu_H + wl_eff * ext.mu_L
            const = (1.0 + wl_eff) * (cfg.mu0 * (ext.u + cfg.lam) - ext.c)
            lam, T = cfg.lam, cfg.horizon

            def slope(s):
                e = math.exp(-lam * s)
                return (
                    b2 * rep.pi_premium * lam * e * (T - s)
                    + b2 * (rep.pi_premium + rep.pi_cancel) * math.expm1(-lam * s)
                    + const
                )

            scale = max(abs(b2 * rep.pi_premium * lam * T), abs(const), 1e-9)
            at_root = abs(slope(rep.t0)) <= 1e-6 * scale
            at_edge = (rep.t0 == T and slope(T) >= -1e-9 * scale) or (
                rep.t0 == 0.0 and slope(0.0) <= 1e-9 * scale
            )
            interior_gain = rep.pi_premium + rep.pi_cancel < 0.0 and rep.t0 == T
            ok = at_root or at_edge or interior_gain
            payload["check"] = {"stationarity": ok, "passed": ok}
            failed = not ok
        artifacts.append(("extension.json", "json", payload))

    elif which == "bad-news":
        rep = bad_news_mechanism(
            cfg.lam, cfg.args["l"], cfg.args["u"], cfg.mu0, wl, cfg.horizon
        )
        payload = {
            "task": "extension",
            "which": which,
            "wl": wl,
            "p0": rep.p0,
            "pi_L": rep.payoff_L,
            "pi_H": rep.payoff_H,
            "objective": rep.objective,
            "expected_refund": rep.expected_refund,
            "falsify_margin": rep.falsify_margin,
        }
        if do_check:
            mags = np.abs(rep.refund.deltas)
            shrinking = bool(np.all(np.diff(mags) <= 1e-12))
            terminal = abs(rep.refund.deltas[-1]) <= 1e-12
            ok = shrinking and terminal and rep.falsify_margin >= -1e-8
            payload["check"] = {
                "refund_shrinks": shrinking,
                "terminal_zero": terminal,
                "falsify_margin": rep.falsify_margin,
                "passed": ok,
            }
            failed = not ok
        artifacts.append(("extension.json", "json", payload))
        artifacts.append(("refunds.csv", "csv", (_REFUND_HEADER, rep.refund.to_rows())))
        artifacts.append(("refunds.png", "png", _refunds_png([("loss refund", rep.refund)])))

    else:  # mixed-news
        rep = mixed_news_mechanism(
            cfg.lam, cfg.mu0, wl, cfg.horizon, cfg.args["vbar"], cfg.args["vlow"]
        )
        payload = {
            "task": "extension",
            "which": which,
            "wl": wl,
            "t0": rep.t0,
            "p0": rep.p0,
            "pi_L": rep.payoff_L,
            "pi_H": rep.payoff_H,
            "objective": rep.objective,
            "expected_refund_high": rep.expected_refund_high,
            "expected_refund_low": rep.expected_refund_low,
            "falsify_margin": rep.falsify_margin,
        }
        if do_check:
            terminal = (
                abs(rep.refund_low.deltas[-1]) <= 1e-12
                and abs(rep.refund_high.deltas[-1]) <= 1e-12
            )
            surcharge_flat = bool(
                np.all(rep.refund_high.deltas[rep.refund_high.times < rep.t0] >= 0.0)
            )
            ok = terminal and surcharge_flat and rep.falsify_margin >= -1e-8
            payload["check"] = {
                "terminal_zero": terminal,
                "surcharge_nonnegative": surcharge_flat,
                "falsify_margin": rep.falsify_margin,
                "passed": ok,
            }
            failed = not ok
        artifacts.append(("extension.json", "json", payload))
        artifacts.append(
            ("refunds.csv", "csv", (_REFUND_HEADER, rep.refund_low.to_rows()))
        )
        artifacts.append(
            ("refunds_high.csv", "csv", (_REFUND_HEADER, rep.refund_high.to_rows()))
        )
        artifacts.append(
            (
                "refunds.png",
                "png",
                _refunds_png(
                    [("low-signal refund", rep.refund_low), ("high-signal surcharge", rep.refund_high)]
                ),
            )
        )

    return artifacts, warnings, failed


_HANDLERS = {
    "solve": _task_solve,
    "free-trial": _task_free_trial,
    "frontier": _task_frontier,
    "check": _task_check,
    "simulate": _task_simulate,
    "oracle": _task_oracle,
    "tiered": _task_tiered,
    "welfare": _task_welfare,
    "extension": _task_extension,
}

_FLAG_FIELDS = (("seed", "seed"), ("paths", "paths"), ("wl", "wl"), ("grid", "grid"))


def _apply_overrides(doc: dict, ns: argparse.Namespace) -> None:
    if ns.task is not None:
        task = doc.setdefault("task", {})
        if isinstance(task, dict):
            task["name"] = ns.task
    if ns.out is not None:
        out = doc.setdefault("output", {})
        if isinstance(out, dict):
            out["dir"] = ns.out
    task = doc.get("task")
    name = task.get("name") if isinstance(task, dict) else None
    for flag, key in _FLAG_FIELDS:
        val = getattr(ns, flag)
        if val is None:
            continue
        if name not in _TASK_FIELDS or key not in _TASK_FIELDS[name]:
            raise ConfigError(
                f"flag_not_applicable:--{flag}",
                f"task {name!r} takes no {key} parameter",
            )
        task[key] = val


def _print_error(error: str, reason: str, message: str) -> None:
    print(
        json.dumps({"error": error, "reason": reason, "message": message}),
        file=sys.stderr,
    )


def _slug(name: str) -> str:
    out = []
    for ch in name:
        if ch.isupper() and out:
            out.append("_")
        out.append(ch.lower())
    return "".join(out)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trialkit",
        description="Solve, verify and report trial/tiered pricing mechanisms.",
    )
    p.add_argument("task", nargs="?", help="override task.name from the config")
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--out", help="override output.dir")
    p.add_argument("--seed", type=int, help="override task.seed (simulate)")
    p.add_argument("--paths", type=int, help="override task.paths (simulate)")
    p.add_argument("--wl", type=float, help="override task.wl")
    p.add_argument("--grid", type=int, help="override task.grid (frontier)")
    p.add_argument(
        "--strict", action="store_true", help="turn precondition warnings into exit 4"
    )
    p.add_argument(
        "--check",
        action="store_true",
        help="run the task's matching verifier and fail on violation",
    )
    return p


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    try:
        doc = load_config(ns.config)
        _apply_overrides(doc, ns)
        cfg = parse_config(doc)
        artifacts, warnings, check_failed = _HANDLERS[cfg.task](cfg, ns.check)
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, kind, payload in artifacts:
            if kind not in cfg.formats:
                continue
            path = out_dir / name
            if kind == "json":
                _write_json(path, payload)
            elif kind == "csv":
                _write_csv(path, *payload)
            else:
                payload(path)
            print(path)
        for note in warnings:
            print(f"warning: {note}", file=sys.stderr)
        if check_failed:
            _print_error(
                "CheckViolation",
                "check_violation",
                "verification failed; see the check section of the report",
            )
            return 3
        if warnings and ns.strict:
            _print_error("StrictWarning", "strict_warning", "; ".join(warnings))
            return 4
        return 0
    except ConfigError as exc:
        _print_error(type(exc).__name__, exc.reason, str(exc))
        return 2
    except (BracketingError, BudgetExceeded) as exc:
        _print_error(type(exc).__name__, _slug(type(exc).__name__), str(exc))
        return 3
    except TrialkitError as exc:
        _print_error(type(exc).__name__, _slug(type(exc).__name__), str(exc))
        return 2 if isinstance(exc, ValueError) else 3
    except ValueError as exc:
        _print_error(type(exc).__name__, "invalid_value", str(exc))
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
