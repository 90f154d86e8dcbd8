"""Command-line pipeline runner.

Subcommands: synth | fit | eval | linkpred | sweep. Every run resolves its
configuration (hard defaults < --config JSON < command-line flags), echoes
it to <out>/config.json, and writes all artifacts under that one output
directory. Exit code 0 on success; on failure a single machine-parsable
"error: ..." line goes to stderr and the exit code is nonzero.
"""

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from .constrained import CommunityModel
from .evaluate import (
    community_f1,
    binarize_memberships,
    link_prediction_experiment,
    make_holdout,
    recon_report,
    reconstruction_sweep,
    rows_to_csv,
)
from .graphs import (
    RecruiterParams,
    adjacency_dense,
    generate_threshold_graph,
    load_communities,
    load_edge_list,
    sample_recruiter,
    save_communities,
    save_edge_list,
)
from .linalg import sigmoid
from .optim import FitConfig
from .pipeline import fit_pipeline
from .serialize import community_report, load_factors, save_factors

_DEFAULTS = {
    "synth": {
        "kind": "recruiter",
        "n": 1000,
        "locations": 10,
        "recruiter_frac": 0.5,
        "p_hetero": 0.8,
        "p_homo": 0.05,
        "p_diff": 0.01,
        "kb": 3,
        "kc": 2,
        "t": 1,
        "density": 0.5,
        "seed": 0,
        "out": None,
    },
    "fit": {
        "input": None,
        "k": 8,
        "seed": 0,
        "reg": "auto",
        "max_iters": 200,
        "variant": "full",
        "eigen_tol": 1e-9,
        "out": None,
    },
    "eval": {
        "input": None,
        "model": None,
        "labels": None,
        "tau": "0.5",
        "seed": 0,
        "out": None,
    },
    "linkpred": {
        "input": None,
        "k": 8,
        "seeds": "0",
        "holdout_frac": 0.1,
        "reg": "auto",
        "max_iters": 200,
        "variant": "full",
        "seed": 0,
        "out": None,
    },
    "sweep": {
        "input": None,
        "k_list": None,
        "variants": "full,homophily-only,svd",
        "seeds": "0",
        "reg": "auto",
        "max_iters": 200,
        "plot": False,
        "seed": 0,
        "out": None,
    },
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="commfit",
        description="Fit and evaluate interpretable community models on graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(sp, *names, **kwargs):
        kwargs.setdefault("default", None)
        sp.add_argument(*names, **kwargs)

    p = sub.add_parser("synth", help="generate a synthetic graph")
    add(p, "--kind", choices=["recruiter", "threshold"])
    add(p, "--n", type=int)
    add(p, "--locations", type=int)
    add(p, "--recruiter-frac", type=float)
    add(p, "--p-hetero", type=float)
    add(p, "--p-homo", type=float)
    add(p, "--p-diff", type=float)
    add(p, "--kb", type=int, help="threshold kind: homophilous membership columns")
    add(p, "--kc", type=int, help="threshold kind: heterophilous membership columns")
    add(p, "--t", type=int, help="threshold kind: edge threshold")
    add(p, "--density", type=float, help="threshold kind: membership density")

    p = sub.add_parser("fit", help="run the three-stage pipeline on a graph")
    add(p, "--input")
    add(p, "--k", type=int)
    add(p, "--reg")
    add(p, "--max-iters", type=int)
    add(p, "--variant", choices=["full", "homophily-only"])
    add(p, "--eigen-tol", type=float)

    p = sub.add_parser("eval", help="score a fitted model against a graph")
    add(p, "--input")
    add(p, "--model")
    add(p, "--labels")
    add(p, "--tau", help="comma-separated membership thresholds")

    p = sub.add_parser("linkpred", help="held-out link prediction experiment")
    add(p, "--input")
    add(p, "--k", type=int)
    add(p, "--seeds", help="comma-separated seed list")
    add(p, "--holdout-frac", type=float)
    add(p, "--reg")
    add(p, "--max-iters", type=int)
    add(p, "--variant", choices=["full", "homophily-only"])

    p = sub.add_parser("sweep", help="reconstruction error over a range of k")
    add(p, "--input")
    add(p, "--k-list", help="comma-separated k values")
    add(p, "--variants", help="comma-separated subset of full,homophily-only,svd")
    add(p, "--seeds", help="comma-separated seed list")
    add(p, "--reg")
    add(p, "--max-iters", type=int)
    add(p, "--plot", action="store_const", const=True,
        help="also render a line plot (requires matplotlib)")

    for sp in sub.choices.values():
        add(sp, "--seed", type=int)
        add(sp, "--config", help="JSON file with defaults for this command")
        add(sp, "--out", help="output directory (default: runs/<command>-<timestamp>)")
    return parser


def _resolve_config(args):
    command = args.command
    resolved = dict(_DEFAULTS[command])
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        for key, value in file_cfg.items():
            if key not in resolved:
                raise ValueError(f"unknown config key {key!r} for command {command!r}")
            resolved[key] = value
    for key in resolved:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _out_dir(cfg, command):
    out = cfg["out"]
    if out is None:
        out = f"runs/{command}-{time.strftime('%Y%m%d-%H%M%S')}"
        cfg["out"] = out
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _echo_config(cfg, command, out):
    with open(out / "config.json", "w") as fh:
        json.dump({"command": command, **cfg}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_reg(value):
    if value == "auto":
        return "auto"
    return float(value)


def _fit_config(cfg):
    return FitConfig(
        max_iters=int(cfg["max_iters"]),
        reg_weight=_parse_reg(cfg["reg"]),
        seed=int(cfg["seed"]),
    )


def _int_list(text):
    return [int(tok) for tok in str(text).split(",") if tok != ""]


def _float_list(text):
    return [float(tok) for tok in str(text).split(",") if tok != ""]


def _load_graph(path):
    with open(path) as fh:
        return load_edge_list(fh)


def _cmd_synth(cfg):
    out = _out_dir(cfg, "synth")
    seed = int(cfg["seed"])
    if cfg["kind"] == "recruiter":
        params = RecruiterParams(
            n=int(cfg["n"]),
            n_locations=int(cfg["locations"]),
            p_hetero_same_loc=float(cfg["p_hetero"]),
            p_homo_same_loc=float(cfg["p_homo"]),
            p_diff_loc=float(cfg["p_diff"]),
            recruiter_frac=float(cfg["recruiter_frac"]),
            seed=seed,
        )
        sample = sample_recruiter(params)
        with open(out / "edges.txt", "w") as fh:
            save_edge_list(sample.graph, fh)
        with open(out / "communities.txt", "w") as fh:
            save_communities(sample.labels, fh)
        np.savetxt(out / "expected.csv", sample.expected, delimiter=",")
        print(f"wrote recruiter graph: n={sample.graph.n} m={sample.graph.num_edges} "
              f"groups={sample.labels.k_truth} -> {out}")
    elif cfg["kind"] == "threshold":
        rng = np.random.default_rng(seed)
        n = int(cfg["n"])
        b = (rng.random((n, int(cfg["kb"]))) < float(cfg["density"])).astype(float)
        c = (rng.random((n, int(cfg["kc"]))) < float(cfg["density"])).astype(float)
        graph = generate_threshold_graph(b, c, int(cfg["t"]))
        with open(out / "edges.txt", "w") as fh:
            save_edge_list(graph, fh)
        np.savetxt(out / "b.txt", b, fmt="%d")
        np.savetxt(out / "c.txt", c, fmt="%d")
        print(f"wrote threshold graph: n={graph.n} m={graph.num_edges} -> {out}")
    else:
        raise ValueError(f"unknown synth kind {cfg['kind']!r}")
    _echo_config(cfg, "synth", out)
    return 0


def _cmd_fit(cfg):
    if cfg["input"] is None:
        raise ValueError("fit requires --input")
    out = _out_dir(cfg, "fit")
    graph = _load_graph(cfg["input"])
    result = fit_pipeline(
        adjacency_dense(graph),
        int(cfg["k"]),
        cfg=_fit_config(cfg),
        variant=cfg["variant"].replace("-", "_"),
        eigen_tol=float(cfg["eigen_tol"]),
    )
    for name, obj in (("lpca", result.lpca), ("init", result.init),
                      ("pruned", result.pruned), ("constrained", result.fitted),
                      ("model", result.model)):
        with open(out / f"{name}.factors", "w") as fh:
            save_factors(obj, fh)
    with open(out / "stages.log", "w") as fh:
        for line in result.stage_lines():
            fh.write(line + "\n")
        fh.write("stage1_history: "
                 + " ".join(repr(v) for v in result.lpca_opt.loss_history) + "\n")
        fh.write("stage3_history: "
                 + " ".join(repr(v) for v in result.fit_opt.loss_history) + "\n")
    _echo_config(cfg, "fit", out)
    print(f"fit complete: k={result.model.k} communities -> {out}")
    return 0


def _cmd_eval(cfg):
    if cfg["input"] is None or cfg["model"] is None:
        raise ValueError("eval requires --input and --model")
    out = _out_dir(cfg, "eval")
    graph = _load_graph(cfg["input"])
    with open(cfg["model"]) as fh:
        model = load_factors(fh)
    if not isinstance(model, CommunityModel):
        raise ValueError("eval expects a community-stage model file")
    a = adjacency_dense(graph)
    report = recon_report(a, sigmoid(model.logits()))
    labels = None
    if cfg["labels"] is not None:
        with open(cfg["labels"]) as fh:
            labels = load_communities(fh)
    rows = []
    base = {
        "variant": "model",
        "k": model.k,
        "seed": cfg["seed"],
        "frob_normalized": report.frob_normalized,
        "ce_normalized": report.ce_normalized,
        "rounded_errors": report.rounded_errors,
    }
    if labels is None:
        rows.append(base)
    else:
        for tau in _float_list(cfg["tau"]):
            detected = binarize_memberships(model, tau)
            row = dict(base)
            row["tau"] = tau
            row["f1"] = community_f1(detected, labels) if detected.k_truth else 0.0
            rows.append(row)
    (out / "metrics.csv").write_text(rows_to_csv(rows))
    (out / "report.txt").write_text(community_report(model))
    _echo_config(cfg, "eval", out)
    print(f"eval complete: frob={report.frob_normalized:.4f} "
          f"rounded_errors={report.rounded_errors} -> {out}")
    return 0


def _cmd_linkpred(cfg):
    if cfg["input"] is None:
        raise ValueError("linkpred requires --input")
    out = _out_dir(cfg, "linkpred")
    graph = _load_graph(cfg["input"])
    fit_cfg = _fit_config(cfg)
    k = int(cfg["k"])
    variant = cfg["variant"].replace("-", "_")
    rows = []
    log_lines = []
    for seed in _int_list(cfg["seeds"]):
        try:
            split = make_holdout(graph.n, float(cfg["holdout_frac"]), seed)
            rep = link_prediction_experiment(
                graph, split, k, cfg=dataclasses.replace(fit_cfg, seed=seed),
                variant=variant,
            )
        except ValueError as exc:
            msg = f"seed {seed}: {exc}"
            log_lines.append(msg)
            print(f"warning: {msg}", file=sys.stderr)
            continue
        rows.append({
            "variant": variant, "k": k, "seed": seed,
            "f1": rep.f1, "precision": rep.precision, "recall": rep.recall,
            "random_baseline_f1": rep.random_baseline_f1,
        })
        log_lines.append(f"seed {seed}: f1={rep.f1:.4f} baseline={rep.random_baseline_f1:.4f}")
    if rows:
        mean_row = {
            "variant": variant, "k": k, "seed": "mean",
            "f1": float(np.mean([r["f1"] for r in rows])),
            "precision": float(np.mean([r["precision"] for r in rows])),
            "recall": float(np.mean([r["recall"] for r in rows])),
            "random_baseline_f1": float(np.mean([r["random_baseline_f1"] for r in rows])),
        }
        rows.append(mean_row)
    (out / "metrics.csv").write_text(rows_to_csv(rows))
    (out / "linkpred.log").write_text("\n".join(log_lines) + "\n")
    _echo_config(cfg, "linkpred", out)
    print(f"linkpred complete: {len(rows)} rows -> {out}")
    return 0


def _cmd_sweep(cfg):
    if cfg["input"] is None:
        raise ValueError("sweep requires --input")
    if cfg["k_list"] is None:
        raise ValueError("sweep requires --k-list")
    out = _out_dir(cfg, "sweep")
    graph = _load_graph(cfg["input"])
    rows = reconstruction_sweep(
        graph,
        _int_list(cfg["k_list"]),
        variants=[v for v in str(cfg["variants"]).split(",") if v],
        cfg=_fit_config(cfg),
        seeds=_int_list(cfg["seeds"]),
    )
    (out / "sweep.csv").write_text(rows_to_csv(rows))
    if cfg["plot"]:
        _render_sweep_plot(rows, out / "sweep.png")
    _echo_config(cfg, "sweep", out)
    print(f"sweep complete: {len(rows)} rows -> {out}")
    return 0


def _render_sweep_plot(rows, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    variants = sorted({r["variant"] for r in rows})
    for variant in variants:
        ks = sorted({r["k"] for r in rows if r["variant"] == variant})
        medians = [
            float(np.median([r["frob_normalized"] for r in rows
                             if r["variant"] == variant and r["k"] == k]))
            for k in ks
        ]
        ax.plot(ks, medians, marker="o", label=variant)
    ax.set_xlabel("k (communities / rank)")
    ax.set_ylabel("normalized Frobenius error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


_COMMANDS = {
    "synth": _cmd_synth,
    "fit": _cmd_fit,
    "eval": _cmd_eval,
    "linkpred": _cmd_linkpred,
    "sweep": _cmd_sweep,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return _COMMANDS[args.command](cfg)
    except Exception as exc:  # one-line machine-parsable failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
