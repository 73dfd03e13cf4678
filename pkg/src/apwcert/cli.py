"""Command-line interface.

Units: energies in units where the kinetic operator is the bare -Laplacian
(hbar^2/2m = 1). Lengths accept the literal ``pi`` (also ``2pi``, ``pi/2``).

Every subcommand reads optional defaults from ``--config file.json``;
explicit flags win over the file. Exit codes: 0 success, 1 invalid input,
2 numerical failure.
"""
import argparse
import json
import logging
import math
import os
import re
import sys

import numpy as np

from .errors import ApwCertError, ConfigError, NumericalError, ValidationError

log = logging.getLogger("apwcert")

_PI_RE = re.compile(r"^\s*([-+]?\d*\.?\d*(?:[eE][-+]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_length(text):
    """Float from text, accepting ``pi``, ``2pi``, ``2*pi`` and ``pi/2``."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _PI_RE.match(str(text))
    if m:
        factor = m.group(1)
        value = math.pi * (float(factor) if factor not in ("", "+", "-") else float(factor + "1"))
        if m.group(2):
            value /= float(m.group(2))
        return value
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse number {text!r}") from None


def parse_vector(text, dim=3):
    if isinstance(text, (list, tuple)):
        v = [parse_length(x) for x in text]
    else:
        v = [parse_length(x) for x in str(text).split(",")]
    if len(v) != dim:
        raise ConfigError(f"expected {dim} components, got {len(v)}")
    return np.array(v)


def parse_list(text, conv=float):
    if isinstance(text, (list, tuple)):
        return [conv(x) for x in text]
    text = str(text)
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        n = int(round((stop - start) / step)) + 1
        return [conv(round(start + i * step, 12)) for i in range(n)]
    return [conv(x) for x in text.split(",") if x.strip()]


# config keys accepted by each subcommand (dest names)
SCHEMA = {
    "solve-well": {"v0", "a", "out"},
    "sweep-well": {"v0", "a", "gammas", "out", "figure"},
    "apw-bands": {"side", "radius", "k", "n_k", "seed", "G_count", "l_max", "out"},
    "apw-convergence": {"side", "radius", "v0", "k", "G_count", "l_max_list", "n_scan", "out"},
    "certify": {"M", "tilde_E", "jump_sums", "C", "problem", "sweep", "out"},
    "orthonormalize": {"gram", "random", "seed", "out"},
    "interval-demo": {"n_modes", "out"},
    "norm-tools": {"R", "coeffs", "s", "h2_constant", "l_eval", "out"},
}


def load_config(path, command):
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"config not found: {path}")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    for key in data:
        if key not in SCHEMA[command]:
            raise ConfigError(f"unknown config key {key!r} for {command}")
    return data


def _opt(args, cfg, name, default=None):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, default)


def _emit(obj, out):
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    print(text)


# ---------------------------------------------------------------- commands

def cmd_solve_well(args, cfg):
    from .radial import find_bound_state, normalize_well_state, well_norm_integrals, _well_params

    V0 = parse_length(_opt(args, cfg, "v0", 1.0))
    a = parse_length(_opt(args, cfg, "a", "pi"))
    E1 = float(find_bound_state(V0, a))
    A, C = normalize_well_state(V0, a, E1)
    alpha, beta = _well_params(V0, E1)
    inner, outer = well_norm_integrals(V0, a, E1)
    result = {
        "V0": V0, "a": a, "E1": E1, "A": A, "C": C,
        "continuity_residual": abs(A * math.sin(alpha * a) - C * math.exp(-beta * a)),
        "norm_residual": abs(A * A * inner + C * C * outer - 1.0),
    }
    print(f"E1 = {E1:.9f}  A = {A:.9f}  C = {C:.9f}")
    if args.out or _opt(args, cfg, "out"):
        _emit(result, _opt(args, cfg, "out"))
    return 0


def cmd_sweep_well(args, cfg):
    from .experiments import DEFAULT_GAMMAS, run_well_sweep, sweep_slope, write_figure_pairs, write_sweep_csv

    V0 = parse_length(_opt(args, cfg, "v0", 1.0))
    a = parse_length(_opt(args, cfg, "a", "pi"))
    gammas = parse_list(_opt(args, cfg, "gammas", list(DEFAULT_GAMMAS)))
    rows = run_well_sweep(V0, a, gammas)
    text = write_sweep_csv(rows, _opt(args, cfg, "out"))
    fig = _opt(args, cfg, "figure")
    if fig:
        write_figure_pairs(rows, fig)
    sys.stdout.write(text)
    print(f"# slope at gamma=0: {sweep_slope(V0, a)!r}")
    return 0


def _geometry(args, cfg):
    from .apw_basis import MuffinTinGeometry

    side = parse_length(_opt(args, cfg, "side", "2pi"))
    radius = parse_length(_opt(args, cfg, "radius", 1.5))
    return MuffinTinGeometry.cubic(side, [[side / 2.0] * 3], [radius])


def cmd_apw_bands(args, cfg):
    from .apw_basis import shortest_reciprocal_vectors
    from .experiments import run_empty_lattice_bands
    from .secular import empty_lattice_bands

    geom = _geometry(args, cfg)
    seed = int(_opt(args, cfg, "seed", 0))
    count = int(_opt(args, cfg, "G_count", 27))
    l_max = int(_opt(args, cfg, "l_max", 30))
    k_opt = _opt(args, cfg, "k")
    if k_opt is not None:
        ks = [parse_vector(k_opt)]
    else:
        rng = np.random.default_rng(seed)
        b = geom.reciprocal
        ks = [rng.uniform(-0.5, 0.5, 3) @ b for _ in range(int(_opt(args, cfg, "n_k", 5)))]
    out = []
    for k in ks:
        G = shortest_reciprocal_vectors(geom, count)
        vals, jumps = run_empty_lattice_bands(geom, k, G, l_max)
        ref = empty_lattice_bands(k, G, geom.cell)
        err = float(np.max(np.abs(vals - ref)))
        out.append({"k": k.tolist(), "energies": vals.tolist(), "reference": ref.tolist(),
                    "max_error": err, "max_jump_l2": float(np.max(jumps))})
        print(f"k = {np.array2string(k, precision=6)}  max|E - |k+G|^2| = {err:.3e}  max jump = {np.max(jumps):.3e}")
    if _opt(args, cfg, "out"):
        _emit(out, _opt(args, cfg, "out"))
    return 0


def cmd_apw_convergence(args, cfg):
    from .experiments import run_apw_convergence

    geom = _geometry(args, cfg)
    V0 = parse_length(_opt(args, cfg, "v0", 1.0))
    k = parse_vector(_opt(args, cfg, "k", [0.1, 0.2, 0.3]))
    l_list = parse_list(_opt(args, cfg, "l_max_list", [4, 8, 12]), int)
    rows = run_apw_convergence(geom, V0, k, int(_opt(args, cfg, "G_count", 7)), l_list,
                               n_scan=int(_opt(args, cfg, "n_scan", 60)))
    table = []
    for r in rows:
        print(f"l_max = {r.l_max:3d}  root = {r.root!r}  jump_h32 = {r.jump_h32:.6e}")
        table.append({"l_max": r.l_max, "root": r.root, "jump_h32": r.jump_h32,
                      "certificate": json.loads(r.certificate.to_json()) if r.certificate else None})
    if _opt(args, cfg, "out"):
        _emit(table, _opt(args, cfg, "out"))
    return 0


def cmd_certify(args, cfg):
    from .certificate import certify, verify_bound_empirical

    problem = cfg.get("problem")
    if problem is not None:
        if not isinstance(problem, dict):
            raise ConfigError("config key 'problem' must be an object")
        sweep = cfg.get("sweep")
        if sweep is None:
            from .experiments import DEFAULT_GAMMAS

            sweep = list(DEFAULT_GAMMAS) if problem.get("kind") == "well" else [2, 4, 6, 8]
        rep = verify_bound_empirical(problem, sweep)
        cert = certify([rep.tilde_E[-1]], [rep.jump_norms[-1]], rep.C_fit if rep.C_fit > 0 else 1.0,
                       "fitted" if rep.C_fit > 0 else "user-supplied", M=1)
        result = json.loads(cert.to_json())
        result["C_fit"] = rep.C_fit
        result["slope_at_zero"] = rep.slope_at_zero
        result["bound_holds"] = rep.passes
        _emit(result, _opt(args, cfg, "out"))
        return 0
    for key in ("tilde_E", "jump_sums"):
        if key not in cfg:
            raise ConfigError(f"config key {key!r} is required")
    C = _opt(args, cfg, "C", None)
    if C is None:
        raise ConfigError("config key 'C' is required (the constant is not derivable)")
    cert = certify(cfg["tilde_E"], cfg["jump_sums"], float(C), "user-supplied", cfg.get("M"))
    _emit(json.loads(cert.to_json()), _opt(args, cfg, "out"))
    return 0


def _parse_matrix(obj):
    try:
        arr = np.array(obj)
        if arr.ndim == 3 and arr.shape[-1] == 2:
            arr = arr[..., 0] + 1j * arr[..., 1]
        return np.asarray(arr, dtype=np.complex128)
    except (TypeError, ValueError):
        raise ConfigError("config key 'gram' must be a square matrix (real or [re, im] pairs)") from None


def cmd_orthonormalize(args, cfg):
    from .orthonorm import orthonormality_residual, random_gram, schmidt_matrix

    gram = cfg.get("gram")
    if gram is None:
        rng = np.random.default_rng(int(_opt(args, cfg, "seed", 0)))
        G = random_gram(rng, int(_opt(args, cfg, "random", 4)))
    else:
        G = _parse_matrix(gram)
    res = schmidt_matrix(G)
    result = {
        "M": int(G.shape[0]),
        "norm1": res.perturbation.norm1,
        "eps_max": res.perturbation.eps_max,
        "deviation_inf": res.deviation,
        "bound": res.bound,
        "bound_ok": res.bound_ok,
        "residual_inf": orthonormality_residual(res.B, G),
        "B": [[[float(z.real), float(z.imag)] for z in row] for row in res.B],
    }
    _emit(result, _opt(args, cfg, "out"))
    return 0


def cmd_interval_demo(args, cfg):
    from .experiments import run_interval_demo

    rep = run_interval_demo(int(_opt(args, cfg, "n_modes", 4)))
    print(f"Dirichlet E1 = {rep.dirichlet:.12g}")
    print(f"Neumann   E1 = {rep.neumann:.12g}")
    flag = "upper bound" if rep.constant_is_upper_bound else "NOT an upper bound for the Dirichlet E1"
    print(f"constant trial q(c,c) = {rep.constant_trial:.12g}  ({flag})")
    if _opt(args, cfg, "out"):
        _emit(rep.as_dict(), _opt(args, cfg, "out"))
    return 0


def cmd_norm_tools(args, cfg):
    from .sobolev import SphereFunction, boundary_sobolev_norm, h2_bound_constant

    R = parse_length(_opt(args, cfg, "R", 1.0))
    result = {"R": R}
    if _opt(args, cfg, "h2_constant"):
        C, ratios = h2_bound_constant(R, int(_opt(args, cfg, "l_eval", 60)))
        result.update({"h2_constant": C, "ratios": ratios.tolist()})
    coeffs = cfg.get("coeffs")
    if coeffs is not None:
        g = SphereFunction.from_json(json.dumps({"R": R, "coeffs": coeffs}))
        s = float(_opt(args, cfg, "s", 1.5))
        result.update({"s": s, "norm": boundary_sobolev_norm(g, s), "norm_l2": boundary_sobolev_norm(g, 0.0)})
    if len(result) == 1:
        raise ConfigError("norm-tools needs 'coeffs' in the config or --h2-constant")
    _emit(result, _opt(args, cfg, "out"))
    return 0


COMMANDS = {
    "solve-well": cmd_solve_well,
    "sweep-well": cmd_sweep_well,
    "apw-bands": cmd_apw_bands,
    "apw-convergence": cmd_apw_convergence,
    "certify": cmd_certify,
    "orthonormalize": cmd_orthonormalize,
    "interval-demo": cmd_interval_demo,
    "norm-tools": cmd_norm_tools,
}


def build_parser():
    p = argparse.ArgumentParser(prog="apwcert", description=__doc__.splitlines()[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="JSON file with default values for the flags below")
        sp.add_argument("--out", help="output file")
        return sp

    sp = add("solve-well", "lowest s-wave bound state of the spherical square well")
    sp.add_argument("--v0", help="well depth V0 (default 1)")
    sp.add_argument("--a", help="well radius (default pi)")

    sp = add("sweep-well", "broken-form energy of discontinuous well states versus the jump size (CSV)")
    sp.add_argument("--v0")
    sp.add_argument("--a")
    sp.add_argument("--gammas", help="comma list or start:stop:step (default 0:0.3:0.01)")
    sp.add_argument("--figure", help="write plot-ready 'gamma tilde_E1' pairs here")

    sp = add("apw-bands", "APW eigenvalues on the empty lattice compared with |k+G|^2")
    sp.add_argument("--side", help="cubic cell side (default 2pi)")
    sp.add_argument("--radius", help="sphere radius (default 1.5)")
    sp.add_argument("--k", help="wavevector 'kx,ky,kz'; random k are drawn when omitted")
    sp.add_argument("--n-k", dest="n_k", type=int, help="number of random k (default 5)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--G-count", dest="G_count", type=int, help="number of reciprocal vectors (default 27)")
    sp.add_argument("--l-max", dest="l_max", type=int, help="angular cutoff (default 30)")

    sp = add("apw-convergence", "lowest energy-dependent APW root and jump norms versus l_max")
    sp.add_argument("--side")
    sp.add_argument("--radius")
    sp.add_argument("--v0")
    sp.add_argument("--k")
    sp.add_argument("--G-count", dest="G_count", type=int)
    sp.add_argument("--l-max-list", dest="l_max_list", help="comma list (default 4,8,12)")
    sp.add_argument("--n-scan", dest="n_scan", type=int)

    sp = add("certify", "jump-penalty certificate from eigenvalues and jump sums, or a fitted one from a sweep")
    sp.add_argument("--C", dest="C", type=float, help="user-supplied constant")

    sp = add("orthonormalize", "Schmidt matrix of a Gram matrix and its deviation bound")
    sp.add_argument("--random", type=int, help="size of a random admissible Gram matrix")
    sp.add_argument("--seed", type=int)

    sp = add("interval-demo", "Rayleigh-Ritz on (0, pi) with Dirichlet and Neumann form domains")
    sp.add_argument("--n-modes", dest="n_modes", type=int)

    sp = add("norm-tools", "H^s norms of sphere functions and the ball extension constant")
    sp.add_argument("--R", dest="R")
    sp.add_argument("--s", dest="s", type=float)
    sp.add_argument("--h2-constant", dest="h2_constant", action="store_true", default=None)
    sp.add_argument("--l-eval", dest="l_eval", type=int)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.command)
        return COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        print(f"error [{exc.identity}]: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error [{exc.identity}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error [cli.IOError]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
