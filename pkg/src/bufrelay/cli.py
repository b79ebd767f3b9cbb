"""Experiment runner: closed-form tables, Monte Carlo runs, and figure presets.

An experiment is a JSON document (or a named built-in preset, or a preset
overlaid by a document) interpreted by one of four commands:

  analyze    evaluate closed-form metrics on a parameter grid
  sweep      analyze with a mandatory sweep axis
  simulate   run the slot-level engine and join matching analytic columns
  compare    tabulate scheme rate ratios (adaptive vs fixed schedules)

Results are written to stdout or a file as CSV (RFC-4180 quoting, full
round-trip float precision) or JSON. Sweep points are dispatched to a worker
pool (--workers or BUFRELAY_WORKERS); rows always come out in grid order and
per-point seeds are derived from (seed, point index), so output bytes do not
depend on the worker count.

Exit codes: 0 success, 2 bad configuration, 3 numerical non-convergence,
4 infeasible design constraints.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple, Optional

import numpy as np

from . import analytic, queueing, sim
from .analytic import HopPair, ModulationParams, SelectionThresholds
from .channel import LinkParams, NodeGeometry, PowerConstraints, derive_link_params
from .queueing import SchemeConstraint, ThresholdProtocolParams
from .specfun import ConvergenceError

__all__ = [
    "ConfigError",
    "InfeasibleError",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_CONVERGENCE",
    "EXIT_INFEASIBLE",
    "PRESETS",
    "cmd_analyze",
    "cmd_simulate",
    "cmd_compare",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_INFEASIBLE = 4


class ConfigError(Exception):
    """Bad experiment document; the message names the offending field."""


class InfeasibleError(Exception):
    """The requested design constraints admit no operating point."""


# ---------------------------------------------------------------------------
# document helpers


def _as_map(doc, key, required=False):
    sec = doc.get(key)
    if sec is None:
        if required:
            raise ConfigError(f"{key}: section required")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{key}: must be a mapping")
    return sec


def _as_num(value, field, positive=False, allow_inf=False):
    if isinstance(value, str) and value == "inf" and allow_inf:
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{field}: must be a number")
    v = float(value)
    if math.isnan(v):
        raise ConfigError(f"{field}: must not be NaN")
    if math.isinf(v) and not allow_inf:
        raise ConfigError(f"{field}: must be finite")
    if positive and not (v > 0.0):
        raise ConfigError(f"{field}: must be positive")
    return v


def _as_int(value, field, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{field}: must be an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{field}: must be at least {minimum}")
    return value


def _get_by_path(doc, path, what):
    node = doc
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"{what}: '{path}' not found in the document")
        node = node[part]
    return node


def _set_by_path(doc, path, value, what):
    parts = path.split(".")
    node = doc
    for part in parts[:-1]:
        nxt = node.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"{what}: '{part}' in '{path}' is not a section")
        node = nxt
    node[parts[-1]] = value


class _Axis(NamedTuple):
    path: str
    values: list
    label: str
    scale_by: Optional[str]


def _axis(doc, key, values_key, monotone=False):
    sec = doc.get(key)
    if sec is None:
        return None
    if not isinstance(sec, dict):
        raise ConfigError(f"{key}: must be a mapping")
    path = sec.get("parameter")
    if not isinstance(path, str) or not path:
        raise ConfigError(f"{key}.parameter: non-empty string required")
    raw = sec.get(values_key)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{key}.{values_key}: non-empty list required")
    values = [
        _as_num(v, f"{key}.{values_key}[{i}]", allow_inf=True)
        for i, v in enumerate(raw)
    ]
    if monotone and len(values) > 1:
        diffs = [b - a for a, b in zip(values, values[1:])]
        if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise ConfigError(f"{key}.{values_key}: must be strictly monotone")
    label = sec.get("label", path.rsplit(".", 1)[-1])
    if not isinstance(label, str) or not label:
        raise ConfigError(f"{key}.label: must be a non-empty string")
    scale_by = sec.get("scale_by")
    if scale_by is not None and (not isinstance(scale_by, str) or not scale_by):
        raise ConfigError(f"{key}.scale_by: must be a parameter path")
    return _Axis(path, values, label, scale_by)


def _expand_points(doc):
    """Cross the optional series and sweep axes into labelled point documents."""
    series = _axis(doc, "series", "values")
    sweep = _axis(doc, "sweep", "grid", monotone=True)
    labels = []
    if series:
        labels.append(series.label)
    if sweep:
        labels.append(sweep.label)
    points = []
    for sv in series.values if series else [None]:
        base = copy.deepcopy(doc)
        if series:
            _set_by_path(base, series.path, sv, "series.parameter")
        for xv in sweep.values if sweep else [None]:
            pt = copy.deepcopy(base)
            lab = [sv] if series else []
            if sweep:
                actual = xv
                if sweep.scale_by:
                    actual = xv * _as_num(
                        _get_by_path(pt, sweep.scale_by, "sweep.scale_by"),
                        "sweep.scale_by target",
                    )
                _set_by_path(pt, sweep.path, actual, "sweep.parameter")
                lab.append(xv)
            points.append((lab, pt))
    return labels, points


# ---------------------------------------------------------------------------
# domain-object builders


def _build_link(sec, field):
    lam = _as_num(sec.get("lam"), f"{field}.lam", positive=True, allow_inf=True)
    mu = _as_num(sec.get("mu"), f"{field}.mu", positive=True)
    try:
        if "p" in sec:
            return LinkParams(lam=lam, mu=mu, p=_as_num(sec["p"], f"{field}.p"))
        return LinkParams.from_lambda_mu(lam, mu)
    except ValueError as exc:
        raise ConfigError(f"{field}: {exc}") from exc


def build_pair(doc) -> HopPair:
    sec = _as_map(doc, "pair", required=True)
    if "links" in sec:
        links = _as_map(sec, "links", required=True)
        return HopPair(
            s=_build_link(_as_map(links, "s", required=True), "pair.links.s"),
            r=_build_link(_as_map(links, "r", required=True), "pair.links.r"),
        )
    geom_sec = _as_map(sec, "geometry", required=True)
    power_sec = _as_map(sec, "power", required=True)
    try:
        geom = NodeGeometry(
            d_sr=_as_num(geom_sec.get("d_sr", 1.0), "pair.geometry.d_sr"),
            d_rd=_as_num(geom_sec.get("d_rd", 1.0), "pair.geometry.d_rd"),
            d_sp=_as_num(geom_sec.get("d_sp"), "pair.geometry.d_sp"),
            d_rp=_as_num(geom_sec.get("d_rp"), "pair.geometry.d_rp"),
            alpha=_as_num(geom_sec.get("alpha", 3.0), "pair.geometry.alpha"),
        )
        power = PowerConstraints(
            gamma_max_db=_as_num(power_sec.get("gamma_max_db"), "pair.power.gamma_max_db"),
            gamma_p_db=_as_num(power_sec.get("gamma_p_db"), "pair.power.gamma_p_db"),
        )
        ohs = sec.get("omega_h_s")
        ohr = sec.get("omega_h_r")
        hop_s, hop_r = derive_link_params(
            geom,
            power,
            None if ohs is None else _as_num(ohs, "pair.omega_h_s", positive=True),
            None if ohr is None else _as_num(ohr, "pair.omega_h_r", positive=True),
        )
    except ValueError as exc:
        raise ConfigError(f"pair: {exc}") from exc
    return HopPair(s=hop_s, r=hop_r)


def _resolve_rho(doc, pair, key="rho"):
    spec = doc.get(key)
    if spec is None:
        raise ConfigError(f"{key}: required here (number, 'balance' or 'fixed-opt')")
    if isinstance(spec, str):
        if spec == "balance":
            return analytic.avg_rate_cabr(pair)[1]
        if spec == "fixed-opt":
            return analytic.rho_opt_fixed(pair)
        raise ConfigError(f"{key}: must be a positive number, 'balance' or 'fixed-opt'")
    return _as_num(spec, key, positive=True)


def _build_thresholds(doc, pair) -> SelectionThresholds:
    rho = _resolve_rho(doc, pair)
    rho_c = _resolve_rho(doc, pair, "rho_c") if "rho_c" in doc else rho
    rho_d = _resolve_rho(doc, pair, "rho_d") if "rho_d" in doc else rho
    return SelectionThresholds(rho=rho, rho_c=rho_c, rho_d=rho_d)


def _build_modulation(doc) -> ModulationParams:
    sec = _as_map(doc, "modulation")
    try:
        return ModulationParams(
            eta=_as_num(sec.get("eta", 2.0), "modulation.eta", positive=True),
            phi=_as_num(sec.get("phi", 1.0), "modulation.phi", positive=True),
            rate_R=_as_num(sec.get("rate_R", 1.0), "modulation.rate_R", positive=True),
        )
    except ValueError as exc:
        raise ConfigError(f"modulation: {exc}") from exc


def _build_buffer(doc, rate_mode) -> sim.BufferState:
    sec = _as_map(doc, "buffer")
    mode = sec.get("mode", "bit" if rate_mode == "adaptive" else "packet")
    try:
        return sim.BufferState(
            discipline=sec.get("discipline", "fifo"),
            capacity=_as_num(
                sec.get("capacity", "inf"), "buffer.capacity", positive=True, allow_inf=True
            ),
            occupancy=_as_num(sec.get("occupancy", 0.0), "buffer.occupancy"),
            mode=mode,
        )
    except ValueError as exc:
        raise ConfigError(f"buffer: {exc}") from exc


def _build_chain(sec) -> ThresholdProtocolParams:
    L = _as_num(sec.get("buffer_size_L"), "chain.buffer_size_L", positive=True, allow_inf=True)
    try:
        if "q_s" in sec:
            return ThresholdProtocolParams(
                buffer_size_L=L,
                q_s=_as_num(sec["q_s"], "chain.q_s"),
                q_c=_as_num(sec.get("q_c", 1.0), "chain.q_c"),
                q_d=_as_num(sec.get("q_d", 1.0), "chain.q_d"),
            )
        if "xi" in sec:
            return ThresholdProtocolParams.from_xis(
                buffer_size_L=L,
                xi=_as_num(sec["xi"], "chain.xi", positive=True),
                xi_c=_as_num(sec.get("xi_c", 0.0), "chain.xi_c"),
                xi_d=_as_num(sec.get("xi_d", 0.0), "chain.xi_d"),
            )
    except ValueError as exc:
        raise ConfigError(f"chain: {exc}") from exc
    raise ConfigError("chain: needs q_s (with q_c, q_d) or xi (with xi_c, xi_d)")


def _point_seed(base: int, index: int) -> int:
    """Stable per-point seed; independent of worker count and dispatch order."""
    return int(np.random.SeedSequence([base, index]).generate_state(1, np.uint64)[0])


def _doc_seed(doc) -> int:
    return _as_int(doc.get("seed", 1), "seed", minimum=0)


def _doc_slots(doc, default=200_000) -> int:
    return _as_int(doc.get("slots", default), "slots", minimum=1)


# ---------------------------------------------------------------------------
# point evaluators (top-level so the process pool can pickle them)

_METRIC_COLUMNS = {
    "capacity": ("capacity_s", "capacity_r"),
    "rate_cabr": ("rho_balance", "rate_cabr"),
    "rho_balance": ("rho_balance", "log2_rho_balance"),
    "rate_noncognitive": ("rate_noncognitive",),
    "rate_cnbr": ("rate_cnbr",),
    "rate_cbr": ("rate_cbr",),
    "rho_opt_fixed": ("rho_opt_fixed",),
    "lsp": ("q_s", "q_r"),
    "ser_cabr": ("ser_cabr_s", "ser_cabr_r"),
    "ser_asym_cabr": ("ser_asym_cabr_s", "ser_asym_cabr_r"),
    "ser_cnbr": ("ser_cnbr_s", "ser_cnbr_r"),
    "ser_asym_cnbr": ("ser_asym_cnbr_s", "ser_asym_cnbr_r"),
    "delay_bound": ("delay_bound",),
}

_DEFAULT_METRICS = ["rate_cabr", "rate_cnbr", "rate_cbr"]


def _noncognitive_pair(pair: HopPair) -> HopPair:
    links = []
    for name, link in (("s", pair.s), ("r", pair.r)):
        if math.isinf(link.lam):
            raise ConfigError(
                f"rate_noncognitive: hop {name} has no peak-power-limited rate (lam=inf)"
            )
        # push the interference cap far past the power cap so it never binds
        links.append(LinkParams.from_lambda_mu(link.lam, 1e9 * link.lam))
    return HopPair(s=links[0], r=links[1])


def _metric_values(metric, doc, pair):
    if metric == "capacity":
        return [analytic.avg_capacity_hop(pair.s), analytic.avg_capacity_hop(pair.r)]
    if metric == "rate_cabr":
        rate, rho = analytic.avg_rate_cabr(pair)
        return [rho, rate]
    if metric == "rho_balance":
        _, rho = analytic.avg_rate_cabr(pair)
        return [rho, math.log2(rho)]
    if metric == "rate_noncognitive":
        return [analytic.avg_rate_cabr(_noncognitive_pair(pair))[0]]
    if metric == "rate_cnbr":
        return [analytic.avg_rate_cnbr(pair)]
    if metric == "rate_cbr":
        return [analytic.avg_rate_cbr(pair)]
    if metric == "rho_opt_fixed":
        return [analytic.rho_opt_fixed(pair)]
    if metric == "lsp":
        return list(analytic.lsp(pair, _resolve_rho(doc, pair)))
    if metric == "ser_cabr":
        t = analytic.ser_exact_cabr(pair, _resolve_rho(doc, pair), _build_modulation(doc))
        return [t.p_s, t.p_r]
    if metric == "ser_asym_cabr":
        t = analytic.ser_asym_cabr(pair, _resolve_rho(doc, pair), _build_modulation(doc))
        return [t.p_s, t.p_r]
    if metric == "ser_cnbr":
        t = analytic.ser_exact_cnbr(pair, _build_modulation(doc))
        return [t.p_s, t.p_r]
    if metric == "ser_asym_cnbr":
        t = analytic.ser_asym_cnbr(pair, _build_modulation(doc))
        return [t.p_s, t.p_r]
    if metric == "delay_bound":
        try:
            return [analytic.delay_bound_adaptive(pair, _resolve_rho(doc, pair))]
        except ValueError:
            return [math.nan]  # no bound on this side of the balance point
    raise ConfigError(f"metrics: unknown metric '{metric}'")


def _pt_table(p):
    doc = p["doc"]
    pair = build_pair(doc)
    row = list(p["labels"])
    for metric in p["metrics"]:
        row.extend(_metric_values(metric, doc, pair))
    return [row]


def _pt_chain(p):
    doc = p["doc"]
    chain = _build_chain(_as_map(doc, "chain", required=True))
    L = chain.buffer_size_L
    if math.isinf(L):
        pi_0, pi_L = queueing._pi0_infinite(chain), 0.0
        occ = lifo_tq = math.nan
    else:
        pi = queueing.steady_state(chain)
        pi_0, pi_L = float(pi[0]), float(pi[-1])
        occ = queueing.mean_occupancy(chain)
        lifo_tq = queueing.lifo_equivalent_queue_delay(chain)
    d = queueing.delays(chain)
    return [
        list(p["labels"])
        + [
            L,
            chain.q_s,
            chain.q_c,
            chain.q_d,
            chain.xi,
            chain.xi_c,
            chain.xi_d,
            queueing.throughput(chain),
            pi_0,
            pi_L,
            occ,
            d.t_q,
            d.t_u,
            d.t_o,
            d.t_total,
            lifo_tq,
        ]
    ]


def _design_knob(design):
    kind = design["name"]
    if kind == "mdmt":
        return _as_num(design.get("x_star"), "designs[].x_star", positive=True)
    if kind == "ct":
        return _as_num(design.get("tau_star"), "designs[].tau_star", positive=True)
    if kind == "eps":
        return _as_num(design.get("epsilon", 0.0), "designs[].epsilon")
    raise ConfigError("designs[].name: must be one of mdmt, ct, eps")


def _design_xi_c(design, xi):
    kind = design["name"]
    knob = _design_knob(design)
    if kind == "mdmt":
        return knob * xi
    if kind == "ct":
        return queueing.ct_xi_c(knob, xi)
    return queueing.epsilon_xi_c(knob, xi)


def _pt_tradeoff(p):
    if p["design"] is None:  # feasibility-boundary row: tau (1 + t) = 1
        tau = p["tau"]
        return [["bound", math.nan, math.nan, math.nan, tau] + p["tail"](tau)]
    design = p["design"]
    xi = p["xi"]
    xi_c = _design_xi_c(design, xi)
    chain = ThresholdProtocolParams.from_xis(math.inf, xi, xi_c, 1.0)
    tau = queueing.throughput(chain)
    row = [design["name"], _design_knob(design), xi, xi_c, tau]
    if p["objective"] == "delay":
        d = queueing.delays(chain)
        row += [d.t_q, d.t_u, d.t_o, d.t_total]
    else:
        pair = build_pair(p["doc"])
        mod = _build_modulation(p["doc"])
        try:
            row += [
                queueing.ser_asym_threshold_pip(pair, xi, xi_c, mod, method="approx"),
                queueing.ser_asym_threshold_pip(pair, xi, xi_c, mod, method="exact"),
            ]
        except ValueError as exc:
            raise ConfigError(f"pair: {exc}") from exc
    return [row]


def _pt_compare(p):
    doc = p["doc"]
    pair = build_pair(doc)
    rate, rho = analytic.avg_rate_cabr(pair)
    cnbr = analytic.avg_rate_cnbr(pair)
    cbr = analytic.avg_rate_cbr(pair)
    return [
        list(p["labels"]) + [rho, rate, cnbr, rate / cnbr, cbr, rate / cbr]
    ]


def _pt_delay_compare(p):
    doc = p["doc"]
    pair = build_pair(doc)
    t_target = _as_num(doc.get("t_target"), "t_target", positive=True)
    try:
        rho = analytic.rho_for_delay_bound(pair, t_target)
    except ValueError as exc:
        raise InfeasibleError(f"t_target={t_target}: {exc}") from exc
    bound = analytic.delay_bound_adaptive(pair, rho)
    rate = analytic.avg_rate_cabr_hop_s(pair, rho)  # arrival-limited throughput
    cnbr = analytic.avg_rate_cnbr(pair)
    return [list(p["labels"]) + [rho, bound, rate, cnbr, rate / cnbr]]


def _pt_overflow(p):
    pair = build_pair(p["doc"])
    try:
        rho = analytic.rho_for_delay_bound(pair, p["t_target"])
    except ValueError as exc:
        raise InfeasibleError(f"t_target={p['t_target']}: {exc}") from exc
    config = sim.SchemeConfig(
        scheme="cabr",
        rate_mode="adaptive",
        slots=p["slots"],
        seed=p["seed"],
        thresholds=SelectionThresholds.uniform(rho),
    )
    curve = sim.overflow_probability(config, pair, np.asarray(p["l_grid"], dtype=float))
    return [
        list(p["labels"]) + [rho, l_value, float(prob)]
        for l_value, prob in zip(p["l_grid"], curve)
    ]


def _pt_ser_sweep(p):
    pair = build_pair(p["doc"])
    mod = _build_modulation(p["doc"])
    scheme = p["scheme"]
    marginal = analytic.ser_exact_cnbr(pair, mod)
    thresh_cols = []
    if scheme == "cabr":
        rho = analytic.rho_opt_fixed(pair)
        exact = analytic.ser_exact_cabr(pair, rho, mod)
        asym = analytic.ser_asym_cabr(pair, rho, mod)
        config = sim.SchemeConfig(
            scheme="cabr",
            rate_mode="fixed",
            slots=p["slots"],
            seed=p["seed"],
            thresholds=SelectionThresholds.uniform(rho),
            modulation=mod,
            buffer=sim.BufferState(mode="packet"),
        )
        # balanced drift: the empty/full mixing weights reduce to 1/L
        for L in p["buffer_sizes"]:
            chain = ThresholdProtocolParams(L, 0.5, 1.0, 1.0)
            ts, tr = queueing.ser_threshold(
                chain, exact.p_s, marginal.p_s, exact.p_r, marginal.p_r
            )
            thresh_cols += [ts, tr]
    else:
        rho = math.nan
        exact, asym = marginal, analytic.ser_asym_cnbr(pair, mod)
        config = sim.SchemeConfig(
            scheme="cnbr",
            rate_mode="fixed",
            slots=p["slots"],
            seed=p["seed"],
            modulation=mod,
            buffer=sim.BufferState(mode="packet"),
        )
        thresh_cols = [math.nan] * (2 * len(p["buffer_sizes"]))
    out = sim.run(config, pair)
    return [
        list(p["labels"])
        + [
            scheme,
            rho,
            exact.p_s,
            exact.p_r,
            asym.p_s,
            asym.p_r,
            out.ser_per_hop[0],
            out.ser_per_hop[1],
            out.ci_halfwidths.get("ser_s", math.nan),
            out.ci_halfwidths.get("ser_r", math.nan),
        ]
        + thresh_cols
    ]


def _chain_from_thresholds(pair, thr, capacity):
    q_s = analytic.lsp(pair, thr.rho)[0]
    q_c = analytic.lsp(pair, thr.rho_c)[0]
    q_d = 1.0 - analytic.lsp(pair, thr.rho_d)[0]
    return ThresholdProtocolParams(capacity, q_s, q_c, q_d)


def _pt_run(p):
    doc = p["doc"]
    pair = build_pair(doc)
    scheme = doc.get("scheme")
    if scheme not in ("cabr", "cnbr", "cbr"):
        raise ConfigError("scheme: must be one of cabr, cnbr, cbr")
    rate_mode = doc.get("rate_mode", "adaptive")
    if rate_mode not in ("adaptive", "fixed"):
        raise ConfigError("rate_mode: must be 'adaptive' or 'fixed'")
    thresholds = _build_thresholds(doc, pair) if scheme == "cabr" else None
    modulation = _build_modulation(doc) if rate_mode == "fixed" else None
    buffer = _build_buffer(doc, rate_mode)
    try:
        config = sim.SchemeConfig(
            scheme=scheme,
            rate_mode=rate_mode,
            slots=p["slots"],
            seed=p["seed"],
            thresholds=thresholds,
            modulation=modulation,
            buffer=buffer,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = sim.run(config, pair)

    nan = math.nan
    rho = thresholds.rho if thresholds else nan
    rate_ref = hop_s_ref = hop_r_ref = q_s_ref = q_c_ref = q_d_ref = nan
    ser_s_ref = ser_r_ref = tau_ref = nan
    t_q_ref = t_u_ref = t_o_ref = t_total_ref = bound = nan
    if scheme == "cabr":
        q_s_ref = analytic.lsp(pair, rho)[0]
        q_c_ref = analytic.lsp(pair, thresholds.rho_c)[0]
        q_d_ref = 1.0 - analytic.lsp(pair, thresholds.rho_d)[0]
        if rate_mode == "adaptive":
            hop_s_ref = analytic.avg_rate_cabr_hop_s(pair, rho)
            hop_r_ref = analytic.avg_rate_cabr_hop_r(pair, rho)
            rate_ref = min(hop_s_ref, hop_r_ref)
            try:
                bound = analytic.delay_bound_adaptive(pair, rho)
            except ValueError:
                bound = nan
        else:
            exact = analytic.ser_exact_cabr(pair, rho, modulation)
            p_c = analytic.ser_exact_cabr(pair, thresholds.rho_c, modulation).p_s
            p_d = analytic.ser_exact_cabr(pair, thresholds.rho_d, modulation).p_r
            try:
                chain = ThresholdProtocolParams(
                    buffer.capacity, q_s_ref, q_c_ref, q_d_ref
                )
                ser_s_ref, ser_r_ref = queueing.ser_threshold(
                    chain, exact.p_s, p_c, exact.p_r, p_d
                )
                tau_ref = queueing.throughput(chain)
                d_ref = queueing.delays(chain)
                t_q_ref, t_u_ref, t_o_ref, t_total_ref = (
                    d_ref.t_q,
                    d_ref.t_u,
                    d_ref.t_o,
                    d_ref.t_total,
                )
            except ValueError:
                pass  # growing chain on an unbounded buffer: no steady state
            rate_ref = tau_ref * modulation.rate_R if not math.isnan(tau_ref) else nan
    elif scheme == "cnbr":
        if rate_mode == "adaptive":
            rate_ref = analytic.avg_rate_cnbr(pair)
        else:
            t = analytic.ser_exact_cnbr(pair, modulation)
            ser_s_ref, ser_r_ref = t.p_s, t.p_r
            tau_ref, rate_ref = 0.5, 0.5 * modulation.rate_R
    else:
        if rate_mode == "adaptive":
            rate_ref = analytic.avg_rate_cbr(pair)
        else:
            t = analytic.ser_exact_cnbr(pair, modulation)
            ser_s_ref, ser_r_ref = t.p_s, t.p_r
            tau_ref, rate_ref = 0.5, 0.5 * modulation.rate_R

    ci = out.ci_halfwidths
    return [
        list(p["labels"])
        + [
            scheme,
            rate_mode,
            out.slots_run,
            p["seed"],
            rho,
            out.avg_rate,
            ci.get("avg_rate", nan),
            rate_ref,
            out.rate_hop_s,
            hop_s_ref,
            out.rate_hop_r,
            hop_r_ref,
            out.lsp_empirical[0],
            q_s_ref,
            out.lsp_empirical[1],
            q_c_ref,
            out.lsp_empirical[2],
            q_d_ref,
            out.ser_per_hop[0],
            ci.get("ser_s", nan),
            ser_s_ref,
            out.ser_per_hop[1],
            ci.get("ser_r", nan),
            ser_r_ref,
            out.throughput_pps,
            tau_ref,
            out.delay.t_q,
            t_q_ref,
            out.delay.t_u,
            t_u_ref,
            out.delay.t_o,
            t_o_ref,
            out.delay.t_total,
            t_total_ref,
            out.mean_occupancy,
            out.underflow_count,
            out.overflow_count,
            bound,
        ]
    ]


_POINT_FUNCS = {
    "table": _pt_table,
    "chain": _pt_chain,
    "tradeoff": _pt_tradeoff,
    "compare": _pt_compare,
    "delay-compare": _pt_delay_compare,
    "overflow": _pt_overflow,
    "ser-sweep": _pt_ser_sweep,
    "run": _pt_run,
}


def _eval_task(task):
    name, payload = task
    return _POINT_FUNCS[name](payload)


def _run_tasks(name, payloads, workers):
    tasks = [(name, p) for p in payloads]
    if workers <= 1 or len(tasks) <= 1:
        results = [_eval_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_task, tasks))
    return [row for point_rows in results for row in point_rows]


# ---------------------------------------------------------------------------
# mode builders: document -> (columns, payloads, evaluator name)


def _build_table(doc):
    labels, points = _expand_points(doc)
    metrics = doc.get("metrics", list(_DEFAULT_METRICS))
    if not isinstance(metrics, list) or not metrics:
        raise ConfigError("metrics: non-empty list required")
    columns = list(labels)
    for m in metrics:
        if m not in _METRIC_COLUMNS:
            raise ConfigError(
                f"metrics: unknown metric '{m}' (choices: {', '.join(sorted(_METRIC_COLUMNS))})"
            )
        for col in _METRIC_COLUMNS[m]:
            if col in columns:
                raise ConfigError(f"metrics: column '{col}' requested twice")
            columns.append(col)
    payloads = [{"labels": lab, "doc": pt, "metrics": metrics} for lab, pt in points]
    return columns, payloads, "table"


def _build_chain_table(doc):
    labels, points = _expand_points(doc)
    columns = list(labels) + [
        "L",
        "q_s",
        "q_c",
        "q_d",
        "xi",
        "xi_c",
        "xi_d",
        "tau",
        "pi_0",
        "pi_L",
        "mean_occupancy",
        "t_q",
        "t_u",
        "t_o",
        "t_total",
        "lifo_t_q",
    ]
    payloads = [{"labels": lab, "doc": pt} for lab, pt in points]
    return columns, payloads, "chain"


def _tradeoff_designs(doc):
    raw = doc.get("designs")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("designs: non-empty list required")
    designs = []
    for i, d in enumerate(raw):
        if not isinstance(d, dict) or "name" not in d:
            raise ConfigError(f"designs[{i}]: mapping with a 'name' required")
        _design_knob(d)  # validates name and knob
        designs.append(d)
    return designs


def _build_tradeoff(doc):
    objective = doc.get("objective", "delay")
    if objective not in ("delay", "ber"):
        raise ConfigError("objective: must be 'delay' or 'ber'")
    grid = doc.get("xi_grid")
    if not isinstance(grid, list) or not grid:
        raise ConfigError("xi_grid: non-empty list required")
    xi_grid = [_as_num(v, f"xi_grid[{i}]") for i, v in enumerate(grid)]
    if any(not (x > 1.0) for x in xi_grid):
        raise ConfigError("xi_grid: every drift ratio must exceed 1")
    designs = _tradeoff_designs(doc)

    constraint = None
    if "constraint" in doc:
        sec = _as_map(doc, "constraint", required=True)
        try:
            constraint = SchemeConstraint(
                t_max=_as_num(sec.get("t_max"), "constraint.t_max"),
                tau_min=_as_num(sec.get("tau_min"), "constraint.tau_min"),
            )
        except ValueError as exc:
            raise ConfigError(f"constraint: {exc}") from exc
        feas = queueing.feasibility(constraint)
        if not feas.feasible:
            raise InfeasibleError(feas.violated)

    payloads = []
    for design in designs:
        grid_d = xi_grid
        if constraint is not None:
            if design["name"] == "mdmt":
                rng = queueing.mdmt_xi_range(design["x_star"], constraint)
                if not rng.feasible:
                    raise InfeasibleError(f"mdmt x*={design['x_star']}: {rng.violated}")
                grid_d = [x for x in xi_grid if rng.xi_lo <= x <= rng.xi_hi]
            elif design["name"] == "ct":
                if design["tau_star"] < constraint.tau_min:
                    raise InfeasibleError(
                        f"ct tau*={design['tau_star']}: below the throughput floor"
                    )
                try:
                    xi_min = queueing.ct_xi_min(design["tau_star"], constraint.t_max)
                except ValueError as exc:
                    raise InfeasibleError(f"ct tau*={design['tau_star']}: {exc}") from exc
                grid_d = [x for x in xi_grid if x >= xi_min]
        for xi in grid_d:
            payloads.append(
                {"design": design, "xi": xi, "objective": objective, "doc": doc}
            )
    if objective == "delay":
        columns = ["design", "knob", "xi", "xi_c", "tau", "t_q", "t_u", "t_o", "t_total"]
        for tau in doc.get("bound_tau_grid", []):
            t = _as_num(tau, "bound_tau_grid[]", positive=True)
            payloads.append(
                {
                    "design": None,
                    "tau": t,
                    "tail": _bound_delay_tail,
                    "objective": objective,
                }
            )
    else:
        columns = ["design", "knob", "xi", "xi_c", "tau", "ser_s_approx", "ser_s_exact"]
    return columns, payloads, "tradeoff"


def _bound_delay_tail(tau):
    return [math.nan, math.nan, math.nan, 1.0 / tau - 1.0]


def _build_compare(doc):
    labels, points = _expand_points(doc)
    columns = list(labels) + [
        "rho_balance",
        "rate_cabr",
        "rate_cnbr",
        "ratio_cnbr",
        "rate_cbr",
        "ratio_cbr",
    ]
    payloads = [{"labels": lab, "doc": pt} for lab, pt in points]
    return columns, payloads, "compare"


def _build_delay_compare(doc):
    labels, points = _expand_points(doc)
    columns = list(labels) + [
        "rho",
        "delay_bound",
        "rate_cabr",
        "rate_cnbr",
        "ratio_cnbr",
    ]
    payloads = [{"labels": lab, "doc": pt} for lab, pt in points]
    return columns, payloads, "delay-compare"


def _build_run(doc):
    labels, points = _expand_points(doc)
    seed = _doc_seed(doc)
    slots = _doc_slots(doc)
    columns = list(labels) + [
        "scheme",
        "rate_mode",
        "slots",
        "seed",
        "rho",
        "avg_rate",
        "avg_rate_se",
        "avg_rate_ref",
        "rate_hop_s",
        "rate_hop_s_ref",
        "rate_hop_r",
        "rate_hop_r_ref",
        "q_s",
        "q_s_ref",
        "q_c",
        "q_c_ref",
        "q_d",
        "q_d_ref",
        "ser_s",
        "ser_s_se",
        "ser_s_ref",
        "ser_r",
        "ser_r_se",
        "ser_r_ref",
        "tau_pps",
        "tau_ref",
        "t_q",
        "t_q_ref",
        "t_u",
        "t_u_ref",
        "t_o",
        "t_o_ref",
        "t_total",
        "t_total_ref",
        "mean_occupancy",
        "underflow",
        "overflow",
        "delay_bound",
    ]
    payloads = [
        {"labels": lab, "doc": pt, "slots": slots, "seed": _point_seed(seed, i)}
        for i, (lab, pt) in enumerate(points)
    ]
    return columns, payloads, "run"


def _build_overflow(doc):
    grid = doc.get("l_grid")
    if not isinstance(grid, list) or not grid:
        raise ConfigError("l_grid: non-empty list required")
    l_grid = [_as_num(v, f"l_grid[{i}]", positive=True) for i, v in enumerate(grid)]
    if any(b <= a for a, b in zip(l_grid, l_grid[1:])):
        raise ConfigError("l_grid: must be strictly increasing")
    targets = doc.get("t_targets")
    if not isinstance(targets, list) or not targets:
        raise ConfigError("t_targets: non-empty list required")
    geometries = doc.get("geometries")
    if not isinstance(geometries, list) or not geometries:
        raise ConfigError("geometries: non-empty list of {d_sp, d_rp} required")
    seed = _doc_seed(doc)
    slots = _doc_slots(doc, default=500_000)
    base_geom = _as_map(doc, "geometry_base")
    power = _as_map(doc, "power", required=True)
    columns = ["t_target", "d_sp", "d_rp", "rho", "L", "overflow_prob"]
    payloads = []
    index = 0
    for t_target in targets:
        t = _as_num(t_target, "t_targets[]", positive=True)
        for g in geometries:
            if not isinstance(g, dict):
                raise ConfigError("geometries[]: must be mappings")
            d_sp = _as_num(g.get("d_sp"), "geometries[].d_sp", positive=True)
            d_rp = _as_num(g.get("d_rp"), "geometries[].d_rp", positive=True)
            point_doc = {
                "pair": {
                    "geometry": {**base_geom, "d_sp": d_sp, "d_rp": d_rp},
                    "power": power,
                }
            }
            payloads.append(
                {
                    "labels": [t, d_sp, d_rp],
                    "doc": point_doc,
                    "t_target": t,
                    "l_grid": l_grid,
                    "slots": slots,
                    "seed": _point_seed(seed, index),
                }
            )
            index += 1
    return columns, payloads, "overflow"


def _build_ser_sweep(doc):
    cases = doc.get("cases")
    if not isinstance(cases, list) or not cases:
        raise ConfigError("cases: non-empty list required")
    schemes = doc.get("schemes", ["cabr", "cnbr"])
    if not isinstance(schemes, list) or any(s not in ("cabr", "cnbr") for s in schemes):
        raise ConfigError("schemes: list drawn from cabr, cnbr")
    grid = doc.get("gamma_max_db_grid")
    if not isinstance(grid, list) or not grid:
        raise ConfigError("gamma_max_db_grid: non-empty list required")
    gammas = [_as_num(v, f"gamma_max_db_grid[{i}]") for i, v in enumerate(grid)]
    buffer_sizes = [
        _as_int(v, "threshold_buffer_sizes[]", minimum=1)
        for v in doc.get("threshold_buffer_sizes", [])
    ]
    seed = _doc_seed(doc)
    slots = _doc_slots(doc)
    columns = [
        "case",
        "gamma_max_db",
        "scheme",
        "rho",
        "ser_s_exact",
        "ser_r_exact",
        "ser_s_asym",
        "ser_r_asym",
        "ser_s_sim",
        "ser_r_sim",
        "ser_s_se",
        "ser_r_se",
    ]
    for L in buffer_sizes:
        columns += [f"ser_s_L{L}", f"ser_r_L{L}"]
    payloads = []
    index = 0
    for case in cases:
        if not isinstance(case, dict) or "name" not in case:
            raise ConfigError("cases[]: mapping with a 'name' required")
        ohs = _as_num(case.get("omega_h_s", 1.0), "cases[].omega_h_s", positive=True)
        ohr = _as_num(case.get("omega_h_r", 1.0), "cases[].omega_h_r", positive=True)
        mu_s = _as_num(case.get("mu_s"), "cases[].mu_s", positive=True)
        mu_r = _as_num(case.get("mu_r"), "cases[].mu_r", positive=True)
        for gdb in gammas:
            gamma_max = 10.0 ** (gdb / 10.0)
            point_doc = {
                "pair": {
                    "links": {
                        "s": {"lam": gamma_max * ohs, "mu": mu_s},
                        "r": {"lam": gamma_max * ohr, "mu": mu_r},
                    }
                },
                "modulation": _as_map(doc, "modulation"),
            }
            for scheme in schemes:
                payloads.append(
                    {
                        "labels": [case["name"], gdb],
                        "doc": point_doc,
                        "scheme": scheme,
                        "buffer_sizes": buffer_sizes,
                        "slots": slots,
                        "seed": _point_seed(seed, index),
                    }
                )
                index += 1
    return columns, payloads, "ser-sweep"


_MODES = {
    "table": _build_table,
    "chain-table": _build_chain_table,
    "tradeoff": _build_tradeoff,
    "compare": _build_compare,
    "delay-compare": _build_delay_compare,
    "run": _build_run,
    "overflow": _build_overflow,
    "ser-sweep": _build_ser_sweep,
}

_KIND_MODES = {
    "analyze": ("table", "chain-table", "tradeoff"),
    "compare": ("compare", "delay-compare"),
    "simulate": ("run", "overflow", "ser-sweep"),
}


# ---------------------------------------------------------------------------
# figure presets

_POWER_COMMON = {"gamma_max_db": 30.0, "gamma_p_db": 10.0}
_GEOM_COMMON = {"d_sr": 1.0, "d_rd": 1.0, "alpha": 3.0}
_D_SP_GRID = [0.8, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0]
_D_RP_SERIES = [1.5, 2.0, 3.0]
_XI_GRID = [
    1.05, 1.1, 1.2, 1.35, 1.5, 1.75, 2.0, 2.5, 3.0,
    3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 14.0, 20.0,
]
_TRADEOFF_DESIGNS = [
    {"name": "mdmt", "x_star": 1.0},
    {"name": "mdmt", "x_star": 0.5},
    {"name": "mdmt", "x_star": 0.25},
    {"name": "ct", "tau_star": 1.0 / 3.0},
    {"name": "eps", "epsilon": 0.0},
]
_PIP_LINKS = {"s": {"lam": math.inf, "mu": 33.75}, "r": {"lam": math.inf, "mu": 80.0}}
_BPSK = {"eta": 2.0, "phi": 1.0, "rate_R": 1.0}


def _fig_pair(d_sp, d_rp):
    return {
        "geometry": {**_GEOM_COMMON, "d_sp": d_sp, "d_rp": d_rp},
        "power": dict(_POWER_COMMON),
    }


PRESETS = {
    # adaptive-rate throughput vs source-to-primary distance, one curve per
    # relay-to-primary distance, with the unconstrained-power reference
    "fig3": {
        "kind": "analyze",
        "mode": "table",
        "metrics": ["rate_cabr", "rate_noncognitive"],
        "pair": _fig_pair(2.0, 2.0),
        "series": {"parameter": "pair.geometry.d_rp", "values": _D_RP_SERIES},
        "sweep": {"parameter": "pair.geometry.d_sp", "grid": _D_SP_GRID},
    },
    # balance threshold (log2) vs source-to-primary distance; crosses zero
    # where the two interference distances coincide
    "fig4": {
        "kind": "analyze",
        "mode": "table",
        "metrics": ["rho_balance"],
        "pair": _fig_pair(2.0, 2.0),
        "series": {"parameter": "pair.geometry.d_rp", "values": _D_RP_SERIES},
        "sweep": {"parameter": "pair.geometry.d_sp", "grid": _D_SP_GRID},
    },
    # adaptive-selection rate gain over the alternating schedule
    "fig5": {
        "kind": "compare",
        "mode": "compare",
        "pair": _fig_pair(2.0, 2.0),
        "series": {"parameter": "pair.geometry.d_rp", "values": _D_RP_SERIES},
        "sweep": {"parameter": "pair.geometry.d_sp", "grid": _D_SP_GRID},
    },
    # rate gain over the block fill-then-drain schedule vs the distance ratio;
    # the sweep value multiplies the per-series d_rp to give d_sp
    "fig6": {
        "kind": "compare",
        "mode": "compare",
        "pair": _fig_pair(2.0, 2.0),
        "series": {"parameter": "pair.geometry.d_rp", "values": [2.0, 3.0]},
        "sweep": {
            "parameter": "pair.geometry.d_sp",
            "grid": [0.5, 0.7, 0.85, 1.0, 1.15, 1.3, 1.5, 1.75, 2.0],
            "scale_by": "pair.geometry.d_rp",
            "label": "d_sp_over_d_rp",
        },
    },
    # rate gain over the alternating schedule when the mean delay is capped
    "fig7": {
        "kind": "compare",
        "mode": "delay-compare",
        "pair": _fig_pair(2.0, 2.0),
        "series": {"parameter": "t_target", "values": [7.3, 3.3]},
        "sweep": {
            "parameter": "pair.geometry.d_sp",
            "grid": [1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0],
        },
    },
    # occupancy-tail curves at fixed delay caps; the nearer geometry has the
    # stronger interference constraint and the emptier buffer
    "fig8": {
        "kind": "simulate",
        "mode": "overflow",
        "geometry_base": dict(_GEOM_COMMON),
        "power": dict(_POWER_COMMON),
        "t_targets": [7.3, 3.3],
        "geometries": [
            {"d_sp": 1.5, "d_rp": 2.0},
            {"d_sp": 2.25, "d_rp": 3.0},
        ],
        "l_grid": [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        "slots": 500_000,
        "seed": 20,
    },
    # fixed-rate error rates vs peak transmit SNR for matched and mismatched
    # interference caps, with high-SNR asymptotes, simulation points, and the
    # finite-buffer boundary-threshold mixes
    "fig9": {
        "kind": "simulate",
        "mode": "ser-sweep",
        "cases": [
            {"name": "symmetric", "omega_h_s": 1.0, "omega_h_r": 0.5787,
             "mu_s": 156.25, "mu_r": 156.25},
            {"name": "asymmetric", "omega_h_s": 1.0, "omega_h_r": 0.751,
             "mu_s": 156.25, "mu_r": 202.5},
        ],
        "schemes": ["cabr", "cnbr"],
        "gamma_max_db_grid": [
            10.0, 12.5, 15.0, 17.5, 20.0, 22.5, 25.0, 27.5, 30.0,
            32.5, 35.0, 37.5, 40.0, 42.5, 45.0, 47.5, 50.0,
        ],
        "modulation": dict(_BPSK),
        "threshold_buffer_sizes": [2, 10],
        "slots": 200_000,
        "seed": 9,
    },
    # threshold-protocol delay vs throughput, with the feasibility boundary
    "fig10": {
        "kind": "analyze",
        "mode": "tradeoff",
        "objective": "delay",
        "xi_grid": list(_XI_GRID),
        "designs": copy.deepcopy(_TRADEOFF_DESIGNS),
        "bound_tau_grid": [
            0.26, 0.28, 0.30, 0.32, 0.34, 0.36, 0.38,
            0.40, 0.42, 0.44, 0.46, 0.48, 0.50,
        ],
    },
    # threshold-protocol first-hop error rate vs throughput in the
    # interference-limited regime
    "fig11": {
        "kind": "analyze",
        "mode": "tradeoff",
        "objective": "ber",
        "xi_grid": list(_XI_GRID),
        "designs": copy.deepcopy(_TRADEOFF_DESIGNS),
        "pair": {"links": copy.deepcopy(_PIP_LINKS)},
        "modulation": dict(_BPSK),
    },
}


# ---------------------------------------------------------------------------
# commands


def _default_mode(kind, doc):
    if kind == "analyze" and "chain" in doc:
        return "chain-table"
    return _KIND_MODES[kind][0]


def _table_for(kind, doc, workers):
    mode = doc.get("mode", _default_mode(kind, doc))
    if mode not in _KIND_MODES[kind]:
        raise ConfigError(
            f"mode: '{mode}' not valid for {kind} (choices: {', '.join(_KIND_MODES[kind])})"
        )
    columns, payloads, evaluator = _MODES[mode](doc)
    rows = _run_tasks(evaluator, payloads, workers)
    return columns, rows


def cmd_analyze(doc, workers=1):
    """Closed-form metric table over the configured grid."""
    return _table_for("analyze", doc, workers)


def cmd_simulate(doc, workers=1):
    """Monte Carlo runs joined with their matching analytic columns."""
    return _table_for("simulate", doc, workers)


def cmd_compare(doc, workers=1):
    """Scheme rate-ratio table over the configured grid."""
    return _table_for("compare", doc, workers)


# ---------------------------------------------------------------------------
# I/O


def _py(value):
    return value.item() if isinstance(value, np.generic) else value


def _write_csv(columns, rows, stream):
    writer = csv.writer(stream)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_py(v) for v in row])


def _write_json(columns, rows, stream):
    json.dump(
        {"columns": list(columns), "rows": [[_py(v) for v in row] for row in rows]},
        stream,
        indent=1,
    )
    stream.write("\n")


def _emit(columns, rows, path, fmt):
    writer = _write_csv if fmt == "csv" else _write_json
    if path is None or path == "-":
        writer(columns, rows, sys.stdout)
        return
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer(columns, rows, f)


# ---------------------------------------------------------------------------
# entry point


def _load_document(args):
    doc = {}
    if args.preset:
        doc = copy.deepcopy(PRESETS[args.preset])
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as f:
                user = json.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"{args.config}: file not found") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"{args.config}: top level must be a mapping")
        doc.update(user)
    if not doc:
        raise ConfigError("a config file or --preset is required")
    if args.slots is not None:
        doc["slots"] = _as_int(args.slots, "--slots", minimum=1)
    if args.seed is not None:
        doc["seed"] = _as_int(args.seed, "--seed", minimum=0)
    return doc


def _resolve_workers(args):
    if args.workers is not None:
        value = args.workers
    else:
        raw = os.environ.get("BUFRELAY_WORKERS")
        if raw is None:
            return 1
        try:
            value = int(raw)
        except ValueError as exc:
            raise ConfigError(f"BUFRELAY_WORKERS: not an integer: {raw!r}") from exc
    if value < 1:
        raise ConfigError("worker count must be at least 1")
    return value


def _effective_kind(command, doc):
    kind = doc.get("kind", "analyze" if command == "sweep" else command)
    if kind not in _KIND_MODES:
        raise ConfigError(f"kind: must be one of {', '.join(sorted(_KIND_MODES))}")
    if command == "sweep":
        if kind != "analyze":
            raise ConfigError(f"sweep runs analyze documents; this one says kind={kind}")
        if "sweep" not in doc:
            raise ConfigError("sweep: a sweep section is required")
    elif kind != command:
        raise ConfigError(f"this document says kind={kind}; run `bufrelay {kind}`")
    return kind


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="bufrelay",
        description=(
            "Closed-form analysis, Monte Carlo simulation, and scheme comparison "
            "for a two-hop buffer-aided relay link under interference-limited "
            "power control."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analyze": "evaluate closed-form metrics on a grid",
        "sweep": "analyze with a mandatory sweep axis",
        "simulate": "run the slot-level engine with analytic overlay columns",
        "compare": "tabulate scheme rate ratios",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("config", nargs="?", help="JSON experiment document")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in experiment")
        p.add_argument("--seed", type=int, help="override the document seed")
        p.add_argument("--slots", type=int, help="override the slot count")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument(
            "--format", choices=("csv", "json"), default="csv", dest="fmt",
            help="output format (default: csv)",
        )
        p.add_argument("--workers", type=int, help="worker processes for sweep points")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        doc = _load_document(args)
        kind = _effective_kind(args.command, doc)
        workers = _resolve_workers(args)
        columns, rows = _table_for(kind, doc, workers)
        _emit(columns, rows, args.out, args.fmt)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except InfeasibleError as exc:
        print(f"infeasible constraints: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
