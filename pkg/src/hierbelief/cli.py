"""Command-line surface: budget, train, eval, decode, explain, synth.

Every subcommand is deterministic given its inputs and --seed, and writes a
manifest (command, resolved config, 64-bit input digests, seed, version)
alongside its outputs so reruns can be compared byte for byte.

Configuration uses INI files; flags override file values, which override
defaults. Exit codes: 0 ok, 2 parse/config problem, 3 invariant violation,
4 training divergence.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .belief import (
    BeliefState,
    FocalFamily,
    load_family,
    save_family,
)
from .budgeting import (
    BudgetConfig,
    induce_family,
    kmeans,
    load_embeddings,
    project_family,
    save_embeddings,
)
from .consistency import ConsistencyConfig, build_tables, cons_score
from .decoding import DecodeConfig, decode_batch, threshold_grid
from .errors import (
    ConfigError,
    DomainError,
    EmptyInputError,
    FormatError,
    HierBeliefError,
    InvalidLabelError,
    ShapeError,
    TrainingDivergedError,
)
from .fuzzy import MembershipFn, membership, tnorm
from .hierarchy import (
    Hierarchy,
    load_hierarchy,
    project_set,
    save_hierarchy,
    validate_hierarchy,
)
from .metrics import build_report, report_table
from .trainer import (
    HeadModel,
    TrainConfig,
    forward,
    generate_synthetic,
    load_model,
    save_model,
    train,
)
from . import worked_example


# ---------------------------------------------------------------------------
# Config file handling
# ---------------------------------------------------------------------------


def load_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path is not None:
        try:
            read = cp.read(path)
        except configparser.Error as exc:
            raise FormatError(f"{path}: {exc}")
        if not read:
            raise ConfigError(f"config file {path} not found")
    return cp


def _cfg_get(cp, section, key, cast, default, flag=None):
    """Flag > config file > default."""
    if flag is not None:
        return flag
    if cp.has_option(section, key):
        raw = cp.get(section, key)
        try:
            if cast is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError:
            raise ConfigError(f"config [{section}] {key}: bad value {raw!r}")
    return default


def consistency_config(cp, args) -> ConsistencyConfig:
    fn = MembershipFn(
        family=_cfg_get(cp, "membership", "family", str, "gaussian",
                        getattr(args, "membership", None)),
        sigma=_cfg_get(cp, "membership", "sigma", float, 1.0,
                       getattr(args, "sigma", None)),
        a=_cfg_get(cp, "membership", "a", float, 0.0, getattr(args, "foot", None)),
        b=_cfg_get(cp, "membership", "b", float, 0.5, getattr(args, "shoulder", None)),
    )
    return ConsistencyConfig(
        tnorm=_cfg_get(cp, "tnorm", "kind", str, "product",
                       getattr(args, "tnorm", None)),
        membership=fn,
        tau_f=_cfg_get(cp, "cons", "tau_f", float, 0.5, None),
        tau_c=_cfg_get(cp, "cons", "tau_c", float, 0.5, None),
        normalize_weights=_cfg_get(cp, "cons", "normalize_weights", bool, True, None),
        exclude_omega=_cfg_get(cp, "cons", "exclude_omega", bool, True, None),
    )


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


def _digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.blake2b(fh.read(), digest_size=8).hexdigest()


def write_manifest(out_dir, command: str, seed: int, config: dict, inputs: dict) -> str:
    manifest = {
        "command": command,
        "seed": seed,
        "tool_version": __version__,
        "config": config,
        "inputs": {name: _digest(path) for name, path in sorted(inputs.items())},
    }
    path = os.path.join(out_dir, f"{command}_manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# Predictions file: header "n=<samples> f=<|O_f|> c=<|O_c|>"; one sample per
# line: "true_fine true_coarse | fine beliefs | coarse beliefs".
# ---------------------------------------------------------------------------


def save_predictions(path, y_fine, y_coarse, bel_f, bel_c) -> None:
    bf = np.atleast_2d(np.asarray(bel_f, dtype=float))
    bc = np.atleast_2d(np.asarray(bel_c, dtype=float))
    lines = [f"n={bf.shape[0]} f={bf.shape[1]} c={bc.shape[1]}"]
    for i in range(bf.shape[0]):
        f_part = " ".join(repr(float(v)) for v in bf[i])
        c_part = " ".join(repr(float(v)) for v in bc[i])
        lines.append(f"{int(y_fine[i])} {int(y_coarse[i])} | {f_part} | {c_part}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_predictions(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = [
        (i + 1, ln.strip()) for i, ln in enumerate(lines)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not body:
        raise FormatError(f"{path}: empty predictions file")
    lineno, header = body[0]
    parts = dict(kv.split("=", 1) for kv in header.split() if "=" in kv)
    if set(parts) != {"n", "f", "c"}:
        raise FormatError(f"{path}:{lineno}: header must be 'n=... f=... c=...'")
    try:
        n, nf, nc = (int(parts[k]) for k in ("n", "f", "c"))
    except ValueError:
        raise FormatError(f"{path}:{lineno}: non-integer header value")
    if len(body) - 1 != n:
        raise FormatError(f"{path}: header says n={n}, found {len(body) - 1} rows")

    yf = np.empty(n, dtype=int)
    yc = np.empty(n, dtype=int)
    bf = np.empty((n, nf))
    bc = np.empty((n, nc))
    for row, (lineno, line) in enumerate(body[1:]):
        pieces = [p.strip() for p in line.split("|")]
        if len(pieces) != 3:
            raise FormatError(f"{path}:{lineno}: expected 'labels | fine | coarse'")
        labels = pieces[0].split()
        fvals, cvals = pieces[1].split(), pieces[2].split()
        if len(labels) != 2 or len(fvals) != nf or len(cvals) != nc:
            raise FormatError(f"{path}:{lineno}: wrong field count")
        try:
            yf[row], yc[row] = int(labels[0]), int(labels[1])
            bf[row] = [float(v) for v in fvals]
            bc[row] = [float(v) for v in cvals]
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed number")
        if np.any(bf[row] < 0) or np.any(bf[row] > 1) or np.any(bc[row] < 0) or np.any(bc[row] > 1):
            raise FormatError(f"{path}:{lineno}: beliefs must lie in [0,1]")
    return yf, yc, bf, bc


# ---------------------------------------------------------------------------
# Shared evaluation pipeline
# ---------------------------------------------------------------------------


def evaluate_beliefs(
    bel_f, bel_c, y_fine, y_coarse,
    h: Hierarchy, fam_f: FocalFamily, fam_c: FocalFamily,
    decode_cfg: DecodeConfig, bins: int = 15,
):
    """belief -> mass -> pignistic -> decode -> metrics for one batch."""
    state_f = BeliefState.from_beliefs(bel_f, fam_f)
    state_c = BeliefState.from_beliefs(bel_c, fam_c)
    decoded = decode_batch(state_f.pignistic, state_c.pignistic, h, decode_cfg)
    report = build_report(
        decoded, state_f.pignistic, state_c.pignistic,
        state_f.masses, state_c.masses,
        state_f.omega_mass, state_c.omega_mass,
        y_fine, y_coarse, h, fam_f, fam_c, bins,
    )
    return report, decoded, state_f, state_c


def sample_trace_lines(
    mf, mc, h: Hierarchy, fam_f: FocalFamily, fam_c: FocalFamily,
    tables, cfg: ConsistencyConfig,
) -> list[str]:
    """Step-by-step derivation of one sample's consistency score."""
    mf = np.clip(np.asarray(mf, dtype=float), 0.0, 1.0)
    mc = np.clip(np.asarray(mc, dtype=float), 0.0, 1.0)
    mu = membership(cfg.membership, mc)
    lines = []
    for i, a in enumerate(fam_f.sets):
        proj = project_set(a, h)
        lines.append(
            f"project {a.label(fam_f.space)} -> {proj.label(fam_c.space)}"
            f"   w_f={tables.w_f[i]:.4f}  m_f={mf[i]:.4f}"
        )
    for j, b in enumerate(fam_c.sets):
        lines.append(
            f"coarse {b.label(fam_c.space)}: m_c={mc[j]:.4f}"
            f"  mu={mu[j]:.4f}  w_c={tables.w_c[j]:.4f}"
        )
    for i, a in enumerate(fam_f.sets):
        for j, b in enumerate(fam_c.sets):
            if tables.pair_mask[i, j] == 0.0:
                continue
            t = tnorm(cfg.tnorm, float(mf[i]), float(mu[j]))
            s = tables.w_f[i] * tables.w_c[j] * tables.kappa[i, j] * t
            lines.append(
                f"pair ({a.label(fam_f.space)}, {b.label(fam_c.space)}):"
                f" feasible=1 kappa={tables.kappa[i, j]:.4f}"
                f" T={t:.4f} score={s:.4f}"
            )
    score = cons_score(mf, mc, tables, cfg)
    lines.append(f"denominator {tables.denominator:.4f}")
    lines.append(f"consistency {score:.6f}")
    lines.append(f"loss {1.0 - score:.6f}")
    return lines


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_synth(args, cp) -> int:
    x, y, h = generate_synthetic(
        n_per_class=args.n_per_class, n_fine=args.n_fine,
        n_coarse=args.n_coarse, overlap=args.overlap,
        d=args.dim, seed=args.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    emb = os.path.join(args.out, "embeddings.txt")
    hie = os.path.join(args.out, "hierarchy.txt")
    save_embeddings(x, y, emb)
    save_hierarchy(h, hie)
    write_manifest(
        args.out, "synth", args.seed,
        {"n_per_class": args.n_per_class, "n_fine": args.n_fine,
         "n_coarse": args.n_coarse, "overlap": args.overlap, "dim": args.dim},
        {"embeddings": emb, "hierarchy": hie},
    )
    print(f"wrote {emb} and {hie}")
    return 0


def _load_valid_hierarchy(path) -> Hierarchy:
    h = load_hierarchy(path)
    violations = validate_hierarchy(h)
    if violations:
        raise ShapeError(f"{path}: invalid hierarchy: {'; '.join(violations)}")
    return h


def cmd_budget(args, cp) -> int:
    h = _load_valid_hierarchy(args.hierarchy)
    x, labels = load_embeddings(args.embeddings)
    if labels.size and (labels.min() < 0 or labels.max() >= h.fine.size):
        raise InvalidLabelError(f"{args.embeddings}: label outside the hierarchy")
    cfg = BudgetConfig(
        k=_cfg_get(cp, "budget", "k", int, 8, args.k),
        max_cardinality=_cfg_get(cp, "budget", "max_cardinality", int, None,
                                 args.max_cardinality),
        min_label_frequency=_cfg_get(cp, "budget", "min_label_frequency", float,
                                     0.05, args.min_label_frequency),
        seed=args.seed,
        max_iterations=_cfg_get(cp, "budget", "max_iterations", int, 100,
                                args.max_iterations),
    )
    assignments = kmeans(x, cfg.k, cfg.seed, cfg.max_iterations)
    fam_f = induce_family(assignments, labels, h.fine, cfg)
    fam_c = project_family(fam_f, h)

    os.makedirs(args.out, exist_ok=True)
    fine_path = os.path.join(args.out, "fine_family.txt")
    coarse_path = os.path.join(args.out, "coarse_family.txt")
    save_family(fam_f, fine_path)
    save_family(fam_c, coarse_path)
    write_manifest(
        args.out, "budget", args.seed,
        {"k": cfg.k, "max_cardinality": cfg.max_cardinality,
         "min_label_frequency": cfg.min_label_frequency,
         "max_iterations": cfg.max_iterations},
        {"embeddings": args.embeddings, "hierarchy": args.hierarchy,
         "fine_family": fine_path, "coarse_family": coarse_path},
    )
    print(f"wrote {fine_path} ({len(fam_f)} sets) and {coarse_path} ({len(fam_c)} sets)")
    return 0


def cmd_train(args, cp) -> int:
    h = _load_valid_hierarchy(args.hierarchy)
    x, y = load_embeddings(args.embeddings)
    fam_f = load_family(args.fine_family)
    fam_c = load_family(args.coarse_family)
    cons_cfg = consistency_config(cp, args)
    tables = build_tables(fam_f, fam_c, h, cons_cfg)
    train_cfg = TrainConfig(
        epochs=_cfg_get(cp, "train", "epochs", int, 50, args.epochs),
        warmup_epochs=_cfg_get(cp, "train", "warmup_epochs", int, 5,
                               args.warmup_epochs),
        batch_size=_cfg_get(cp, "train", "batch_size", int, 64, args.batch_size),
        learning_rate=_cfg_get(cp, "train", "learning_rate", float, 0.05,
                               args.learning_rate),
        seed=args.seed,
        early_stop_patience=_cfg_get(cp, "train", "early_stop_patience", int, 5,
                                     args.early_stop_patience),
        val_fraction=_cfg_get(cp, "train", "val_fraction", float, 0.2,
                              args.val_fraction),
        disable_consistency=args.no_consistency,
    )

    model = HeadModel.init(fam_f, fam_c, x.shape[1], train_cfg.seed)
    model, log = train(model, x, y, h, fam_f, fam_c, tables, cons_cfg, train_cfg)

    os.makedirs(args.out, exist_ok=True)
    model_path = os.path.join(args.out, "model.txt")
    log_path = os.path.join(args.out, "loss_log.jsonl")
    preds_path = os.path.join(args.out, "predictions_val.txt")
    save_model(model, model_path)
    with open(log_path, "w", encoding="utf-8") as fh:
        for entry in log:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    # held-out predictions of the selected snapshot, for eval/decode
    rng = np.random.default_rng(train_cfg.seed)
    order = rng.permutation(x.shape[0])
    n_val = int(round(train_cfg.val_fraction * x.shape[0]))
    val_idx = order[:n_val] if n_val else order
    logits_f, logits_c = forward(model, x[val_idx])
    from .belief import sigmoid

    y_val = y[val_idx]
    save_predictions(
        preds_path, y_val, [h.parent_of(int(v)) for v in y_val],
        sigmoid(logits_f), sigmoid(logits_c),
    )

    config_snapshot = {
        "epochs": train_cfg.epochs, "warmup_epochs": train_cfg.warmup_epochs,
        "batch_size": train_cfg.batch_size,
        "learning_rate": train_cfg.learning_rate,
        "early_stop_patience": train_cfg.early_stop_patience,
        "val_fraction": train_cfg.val_fraction,
        "disable_consistency": train_cfg.disable_consistency,
        "tnorm": cons_cfg.tnorm,
        "membership": cons_cfg.membership.family,
        "tau_f": cons_cfg.tau_f, "tau_c": cons_cfg.tau_c,
        "normalize_weights": cons_cfg.normalize_weights,
        "exclude_omega": cons_cfg.exclude_omega,
    }
    write_manifest(
        args.out, "train", args.seed, config_snapshot,
        {"embeddings": args.embeddings, "hierarchy": args.hierarchy,
         "fine_family": args.fine_family, "coarse_family": args.coarse_family,
         "model": model_path, "loss_log": log_path, "predictions": preds_path},
    )
    print(f"trained {len(log)} epochs; wrote {model_path}")
    return 0


def _eval_inputs(args):
    h = _load_valid_hierarchy(args.hierarchy)
    fam_f = load_family(args.fine_family)
    fam_c = load_family(args.coarse_family)
    yf, yc, bf, bc = load_predictions(args.predictions)
    if bf.shape[1] != len(fam_f) or bc.shape[1] != len(fam_c):
        raise ShapeError(
            f"{args.predictions}: belief widths {bf.shape[1]}/{bc.shape[1]} do not "
            f"match family sizes {len(fam_f)}/{len(fam_c)}"
        )
    if yf.size and (yf.min() < 0 or yf.max() >= h.fine.size):
        raise InvalidLabelError("true fine label outside the hierarchy")
    if yc.size and (yc.min() < 0 or yc.max() >= h.coarse.size):
        raise InvalidLabelError("true coarse label outside the hierarchy")
    return h, fam_f, fam_c, yf, yc, bf, bc


def cmd_eval(args, cp) -> int:
    h, fam_f, fam_c, yf, yc, bf, bc = _eval_inputs(args)
    cons_cfg = consistency_config(cp, args)
    decode_cfg = DecodeConfig(args.tau_f, args.tau_c)

    report, decoded, state_f, state_c = evaluate_beliefs(
        bf, bc, yf, yc, h, fam_f, fam_c, decode_cfg, args.bins
    )

    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "report.json")
    text_path = os.path.join(args.out, "report.txt")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    table = report_table(report, args.bins)
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(table)
    print(table, end="")

    outputs = {"predictions": args.predictions, "hierarchy": args.hierarchy,
               "fine_family": args.fine_family, "coarse_family": args.coarse_family,
               "report_json": json_path, "report_text": text_path}

    if args.explain:
        tables = build_tables(fam_f, fam_c, h, cons_cfg)
        for i in range(state_f.masses.shape[0]):
            print(f"--- sample {i} ---")
            for line in sample_trace_lines(
                state_f.masses[i], state_c.masses[i], h, fam_f, fam_c,
                tables, cons_cfg,
            ):
                print(line)

    if args.tau_grid:
        grid_path = os.path.join(args.out, "grid.txt")
        rows = []
        for cfg in threshold_grid():
            r, _, _, _ = evaluate_beliefs(
                bf, bc, yf, yc, h, fam_f, fam_c, cfg, args.bins
            )
            rows.append(
                f"{cfg.tau_f:.1f} {cfg.tau_c:.1f} "
                f"{r.acc_f:.4f}/{r.acc_c:.4f} "
                f"{r.betp_acc_f:.4f}/{r.betp_acc_c:.4f} "
                f"{r.ece_f:.4f}/{r.ece_c:.4f} "
                f"{r.entropy_f:.4f}/{r.entropy_c:.4f} "
                f"{r.logical_consistency:.4f} "
                + "/".join(f"{v:.4f}" for v in r.prf_c)
            )
        header = ("tau_f tau_c acc(f/c) betp_acc(f/c) ece(f/c) "
                  "entropy(f/c) log_cons prf_coarse(P/R/F1)")
        with open(grid_path, "w", encoding="utf-8") as fh:
            fh.write(header + "\n" + "\n".join(rows) + "\n")
        print(header)
        print("\n".join(rows))
        outputs["grid"] = grid_path

    write_manifest(
        args.out, "eval", args.seed,
        {"tau_f": args.tau_f, "tau_c": args.tau_c, "bins": args.bins,
         "tau_grid": args.tau_grid},
        outputs,
    )
    return 0


def cmd_decode(args, cp) -> int:
    h, fam_f, fam_c, yf, yc, bf, bc = _eval_inputs(args)
    decode_cfg = DecodeConfig(args.tau_f, args.tau_c)
    state_f = BeliefState.from_beliefs(bf, fam_f)
    state_c = BeliefState.from_beliefs(bc, fam_c)
    decoded = decode_batch(state_f.pignistic, state_c.pignistic, h, decode_cfg)

    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "decoded.txt")
    lines = [f"n={len(decoded)}"]
    for d in decoded:
        lines.append(
            f"{d.fine_pred} {repr(d.fine_conf)} {d.coarse_base} "
            f"{d.coarse_pred} {int(d.overridden)}"
        )
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    write_manifest(
        args.out, "decode", args.seed,
        {"tau_f": args.tau_f, "tau_c": args.tau_c},
        {"predictions": args.predictions, "hierarchy": args.hierarchy,
         "fine_family": args.fine_family, "coarse_family": args.coarse_family,
         "decoded": out_path},
    )
    print(f"wrote {out_path}")
    return 0


def cmd_explain(args, cp) -> int:
    trace = worked_example.run()
    h, of, oc = trace.hierarchy, trace.of, trace.oc
    print("reference walkthrough (flowers/trees toy hierarchy)")
    for line in sample_trace_lines(
        trace.mf, trace.mc, h, of, oc, trace.tables, trace.cfg
    ):
        print(line)
    problems = worked_example.check(trace)
    if problems:
        for p in problems:
            print(f"DEVIATION: {p}", file=sys.stderr)
        return 3
    print("all reference values reproduced within tolerance")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hierbelief",
        description="Belief-function calculus for two-level hierarchical classification",
    )
    parser.add_argument("--seed", type=int, default=42, help="global seed (default 42)")
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument("--out", default=".", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic embeddings + hierarchy")
    p.add_argument("--n-per-class", type=int, default=60)
    p.add_argument("--n-fine", type=int, default=6)
    p.add_argument("--n-coarse", type=int, default=3)
    p.add_argument("--overlap", type=float, default=0.0)
    p.add_argument("--dim", type=int, default=8)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("budget", help="induce focal-set families from embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--max-cardinality", type=int, default=None)
    p.add_argument("--min-label-frequency", type=float, default=None)
    p.add_argument("--max-iterations", type=int, default=None)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("train", help="train the two focal-set heads")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--fine-family", required=True)
    p.add_argument("--coarse-family", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--warmup-epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--early-stop-patience", type=int, default=None)
    p.add_argument("--val-fraction", type=float, default=None)
    p.add_argument("--tnorm", choices=("product", "godel", "lukasiewicz"), default=None)
    p.add_argument("--membership", choices=("gaussian", "triangular", "trapezoidal"),
                   default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--foot", type=float, default=None, help="membership foot a")
    p.add_argument("--shoulder", type=float, default=None, help="membership shoulder b")
    p.add_argument("--no-consistency", action="store_true",
                   help="ablation: pin the consistency weight to zero")
    p.set_defaults(func=cmd_train)

    for name, help_text in (("eval", "metrics report from a predictions file"),
                            ("decode", "constrained decoding of a predictions file")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--predictions", required=True)
        p.add_argument("--hierarchy", required=True)
        p.add_argument("--fine-family", required=True)
        p.add_argument("--coarse-family", required=True)
        p.add_argument("--tau-f", type=float, default=0.5)
        p.add_argument("--tau-c", type=float, default=0.5)
        if name == "eval":
            p.add_argument("--bins", type=int, default=15)
            p.add_argument("--tau-grid", action="store_true",
                           help="evaluate the 3x3 threshold grid")
            p.add_argument("--explain", action="store_true",
                           help="print a per-sample derivation trace")
            p.add_argument("--tnorm", choices=("product", "godel", "lukasiewicz"),
                           default=None)
            p.add_argument("--membership",
                           choices=("gaussian", "triangular", "trapezoidal"),
                           default=None)
            p.add_argument("--sigma", type=float, default=None)
            p.add_argument("--foot", type=float, default=None)
            p.add_argument("--shoulder", type=float, default=None)
            p.set_defaults(func=cmd_eval)
        else:
            p.set_defaults(func=cmd_decode)

    p = sub.add_parser("explain", help="print the built-in reference walkthrough")
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cp = load_config(args.config)
        return args.func(args, cp)
    except (FormatError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ShapeError, InvalidLabelError, EmptyInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except HierBeliefError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
