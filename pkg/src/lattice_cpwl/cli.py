"""Command-line front end: ``lattice-cpwl {constants,sweep,rate,disk,relu}``.

CSV goes to stdout unless ``--output`` is given; summaries go to stderr in
that case.  Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from fractions import Fraction

import numpy as np

from . import asymptotics, relunet
from ._accel import set_threads
from .errors import DegenerateLattice, InvalidStepsize, QuadratureUnderResolved, SolverDiverged
from .functions import REGISTRY, fourier_disk, make_function, with_support
from .lattice import PRESETS, build_grid, preset
from .projection import rate_study

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def _g(v: float) -> str:
    return f"{v:.17g}"


def _number(text: str) -> float:
    """Float or exact fraction such as ``1/64``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _number_list(text: str) -> list[float]:
    return [_number(t) for t in text.split(",") if t.strip()]


def _param(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), _number(v)


def _angles(args) -> tuple[float, float]:
    if args.preset:
        return PRESETS[args.preset]
    if args.theta1 is None or args.theta2 is None:
        raise UsageError("give --preset or both --theta1 and --theta2")
    t1, t2 = args.theta1, args.theta2
    if args.degrees:
        t1, t2 = math.radians(t1), math.radians(t2)
    return t1, t2


def _add_lattice_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--theta1", type=_number)
    p.add_argument("--theta2", type=_number)
    p.add_argument("--degrees", action="store_true", help="angles are in degrees")


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _emit(text: str, path) -> None:
    out = _open_out(path)
    try:
        out.write(text)
    finally:
        if out is not sys.stdout:
            out.close()


def _summary(args, line: str) -> None:
    print(line, file=sys.stderr if args.output in (None, "-") else sys.stdout)


SWEEP_PLOT = """\
import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt({csv!r}, delimiter=",", names=True)
t1 = np.unique(d["theta1"])
dl = np.unique(d["delta"])
M = d["M"].reshape(t1.size, dl.size)
plt.pcolormesh(dl, t1, np.ma.masked_invalid(M), shading="auto")
plt.xlabel("delta")
plt.ylabel("theta1")
plt.colorbar(label="M(theta1, delta)")
plt.savefig({png!r}, dpi=150)
"""

RATE_PLOT = """\
import numpy as np
import matplotlib.pyplot as plt

d = np.genfromtxt({csv!r}, delimiter=",", names=True, dtype=None, encoding=None)
plt.loglog(d["T"], d["eps_measured"], "o-", label="measured")
plt.loglog(d["T"], d["eps_asym"], "--", label="asymptotic")
plt.xlabel("T")
plt.ylabel("L2 error")
plt.legend()
plt.savefig({png!r}, dpi=150)
"""


def _plot_script(args, template: str) -> None:
    if not args.plot_script:
        return
    if args.output in (None, "-"):
        raise UsageError("--plot-script needs --output so the script can reference the CSV")
    png = args.output.rsplit(".", 1)[0] + ".png"
    with open(args.plot_script, "w") as fh:
        fh.write(template.format(csv=args.output, png=png))


def cmd_constants(args) -> int:
    t1, t2 = _angles(args)
    k = asymptotics.abg(t1, t2)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta1", "theta2", "alpha", "beta", "gamma", "C"])
    w.writerow([_g(t1), _g(t2), _g(k.alpha), _g(k.beta), _g(k.gamma), _g(k.c_const)])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    table = asymptotics.sweep_landscape(steps=args.resolution)
    out = _open_out(args.output)
    try:
        table.to_csv(out, plot=args.plot)
    finally:
        if out is not sys.stdout:
            out.close()
    t1, d = table.argmin
    _summary(args, f"min={_g(table.min)} theta1={_g(t1)} delta={_g(d)}")
    _plot_script(args, SWEEP_PLOT)
    return EXIT_OK


def cmd_rate(args) -> int:
    params = dict(args.param or [])
    f = make_function(args.function, **params)
    region = None
    if args.region:
        x0, x1, y0, y1 = args.region
        region = ((x0, x1), (y0, y1))
    elif f.effective_support is None:
        region = ((-1.0, 1.0), (-1.0, 1.0))
    if region is not None:
        f = with_support(f, region)
    t1, t2 = _angles(args)
    build_grid(t1, t2, 0.5)  # validate angles before any work
    margin = args.margin
    if margin is None:
        # non-decaying functions need room for the truncation error to die out
        margin = 2 if f.id != "affine" else 20
    measure = None
    if f.id == "affine":
        (x0, x1), (y0, y1) = region
        measure = ((x0 / 2, x1 / 2), (y0 / 2, y1 / 2))
    report = rate_study(f, t1, t2, args.T, margin=margin, measure_region=measure)
    _emit(report.to_csv(), args.output)
    if report.exact_reproduction:
        _summary(args, "exact reproduction: all errors <= 1e-8")
    else:
        _summary(args, f"final slope={_g(report.final_slope)} fitted slope={_g(report.fitted_slope)}")
    _plot_script(args, RATE_PLOT)
    return EXIT_OK


def disk_table(c: float, omega_max: float, T: float):
    """Rows ``(quantity, cartesian, hexagonal, ratio, crosscheck_rel_err)``."""
    f = fourier_disk(c, omega_max)
    closed = {k: asymptotics.fourier_disk_asym(k, c, omega_max, T) for k in ("cartesian", "hexagonal")}
    quad = {k: asymptotics.asym_error_fourier(f, preset(k, T)) for k in ("cartesian", "hexagonal")}
    rel = max(abs(closed[k] - quad[k]) / closed[k] for k in closed)
    return [
        ("eps_asym_closed_form", closed["cartesian"], closed["hexagonal"], closed["hexagonal"] / closed["cartesian"], rel),
        ("eps_asym_quadrature", quad["cartesian"], quad["hexagonal"], quad["hexagonal"] / quad["cartesian"], rel),
    ]


def cmd_disk(args) -> int:
    if args.omega_max <= 0 or args.T <= 0:
        raise UsageError("omega_max and T must be positive")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "cartesian", "hexagonal", "ratio", "crosscheck_rel_err"])
    for name, *vals in disk_table(args.c, args.omega_max, args.T):
        w.writerow([name] + [_g(v) for v in vals])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_relu(args) -> int:
    rng = np.random.default_rng(args.seed)
    cg = relunet.random_interior_grid(args.T, rng)
    net = relunet.build_network(cg)
    x = rng.uniform(0.0, 1.0, size=(args.points, 2))
    diff = float(np.max(np.abs(relunet.forward(net, x) - relunet.spline_sum(cg, x))))
    text = relunet.export_network(net)
    if args.output not in (None, "-"):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _summary(args, f"{net.neuron_count} neurons, max |delta| = {diff:.3e} over {args.points} points")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lattice-cpwl", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=None, help="cap worker threads (env LATTICE_CPWL_THREADS)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="alpha, beta, gamma and C for a lattice")
    _add_lattice_args(c)
    c.add_argument("--output")
    c.set_defaults(func=cmd_constants)

    s = sub.add_parser("sweep", help="tabulate M(theta1, delta)")
    s.add_argument("--resolution", type=int, default=500)
    s.add_argument("--plot", action="store_true", help="blank out values >= 10")
    s.add_argument("--plot-script")
    s.add_argument("--output")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("rate", help="projection error versus stepsize")
    r.add_argument("--function", default="gaussian", choices=sorted(REGISTRY))
    r.add_argument("--param", type=_param, action="append", help="function parameter key=value")
    _add_lattice_args(r)
    r.add_argument("--T", type=_number_list, default=[1 / 8, 1 / 16, 1 / 32, 1 / 64], help="comma list, fractions ok")
    r.add_argument("--region", type=_number, nargs=4, metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    r.add_argument("--margin", type=float)
    r.add_argument("--plot-script")
    r.add_argument("--output")
    r.set_defaults(func=cmd_rate)

    d = sub.add_parser("disk", help="Fourier-disk closed forms with a quadrature cross-check")
    d.add_argument("--c", type=_number, default=1.0)
    d.add_argument("--omega-max", type=_number, default=1.0)
    d.add_argument("--T", type=_number, default=1.0)
    d.add_argument("--output")
    d.set_defaults(func=cmd_disk)

    n = sub.add_parser("relu", help="random CPWL function as an exact ReLU network")
    n.add_argument("--T", type=_number, default=0.25)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--points", type=int, default=100_000)
    n.add_argument("--output")
    n.set_defaults(func=cmd_relu)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    try:
        set_threads(args.threads)
        return args.func(args)
    except (DegenerateLattice, InvalidStepsize) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverDiverged, QuadratureUnderResolved) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
