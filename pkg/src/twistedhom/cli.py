"""Command-line interface.

Exit codes: 0 success, 1 internal error, 2 configuration error, 3 I/O or
file-format error, 4 failed self-test or encryption round trip.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, _backend
from .config import apply_overrides, parse_config
from .errors import ConfigError, FormatError, TwistedHomError, UnsupportedConfigurationError
from .hom import (
    DELAY_CONVENTION,
    hom_dip_scan,
    hom_probabilities_analytic,
    hom_probabilities_masked,
    hom_probabilities_numeric,
)
from .imaging import (
    ImagingState,
    coincidence_port_c,
    coincidence_port_d,
    density_port_d,
    encryption_roundtrip,
    mach_zehnder_density,
    reference_density,
    rescaled_range_bound,
    rescaled_signal,
    snr_coherent_map,
    snr_two_photon_map,
)
from .io import encode_pgm, format_value, read_pgm, write_image
from .masks import PhaseMask, builtin_bitmaps
from .states import SPEED_OF_LIGHT

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_IO, EXIT_FAILED = 0, 1, 2, 3, 4
ENGINE = f"twistedhom {__version__}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _stage(msg):
    print(f"[twistedhom] {msg}", file=sys.stderr)


def _read_bytes(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_config(args):
    text = "{}"
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise FormatError(f"cannot read config {args.config}: {exc.strerror or exc}") from None
        except UnicodeDecodeError:
            raise ConfigError("", "config file is not UTF-8") from None
    overrides = list(args.set or [])
    if args.family is not None:
        overrides.append(f"state.family={args.family}")
    if args.m is not None:
        overrides.append(f"state.m={args.m}")
    if args.tau is not None:
        overrides.append(f"state.tau={args.tau!r}")
    if args.out is not None:
        overrides.append(f"output.directory={json.dumps(args.out)}")
    if overrides:
        text = apply_overrides(text, overrides)
    return parse_config(text)


def _prepare_out(cfg):
    out = cfg.output.directory
    try:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "config.json"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(cfg.echo())
        with open(os.path.join(out, "VERSION"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(ENGINE + "\n")
    except OSError as exc:
        raise FormatError(f"cannot prepare output directory {out}: {exc.strerror or exc}") from None
    return out


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror or exc}") from None


def _emit_images(cfg, out, images, floor):
    for name, image in images:
        for fmt in cfg.output.formats:
            write_image(image, os.path.join(out, f"{name}.{fmt}"), fmt,
                        extra={"floor": floor, "engine": ENGINE})


def _imaging_state(cfg, mask=None):
    grid = cfg.build_grid()
    q = cfg.quadrature
    mask = cfg.build_mask(grid, _read_bytes) if mask is None else mask
    state = ImagingState(cfg.build_mode(), mask, q.window, q.window_factor, (q.n_rho, q.n_phi), q.phi_offset)
    return state, grid


# ---------------------------------------------------------------------------
# subcommands


def cmd_probabilities(cfg, args):
    state = cfg.build_state()
    rows = ["method,p_cc,p_dd,p_cd,quadrature_error,converged"]
    try:
        a = hom_probabilities_analytic(state)
        rows.append(_prob_row(a))
    except UnsupportedConfigurationError as exc:
        _stage(f"analytic row skipped: {exc}")
    _stage(f"numeric quadrature ({cfg.hom.mode})")
    rows.append(_prob_row(hom_probabilities_numeric(state, cfg.build_kgrid())))
    text = "\n".join(rows) + "\n"
    sys.stdout.write(text)
    if args.out is not None:
        out = _prepare_out(cfg)
        _write_text(os.path.join(out, "probabilities.csv"), text)
    return EXIT_OK


def _prob_row(p):
    return ",".join([p.method, format_value(p.p_cc), format_value(p.p_dd), format_value(p.p_cd),
                     format_value(p.quadrature_error), str(p.converged).lower()])


def cmd_dip_scan(cfg, args):
    state = cfg.build_state()
    env = state.envelope
    taus = cfg.delays(env)
    _stage(f"dip scan over {len(taus)} delays")
    scan = hom_dip_scan(state, taus, cfg.build_kgrid())
    unit = env.sigma_z / SPEED_OF_LIGHT
    rows = [f"# {scan.state}; {DELAY_CONVENTION}", "tau_s,tau_sigma_units,p_cd,quadrature_error"]
    for t, p, e in zip(scan.delays, scan.p_cd_values, scan.errors):
        rows.append(",".join([format_value(t), format_value(t / unit), format_value(p), format_value(e)]))
    text = "\n".join(rows) + "\n"
    sys.stdout.write(text)
    if args.out is not None:
        out = _prepare_out(cfg)
        _write_text(os.path.join(out, "dip_scan.csv"), text)
    if not scan.converged:
        _stage("warning: some scan points did not converge")
    return EXIT_OK


def cmd_image(cfg, args):
    state, grid = _imaging_state(cfg)
    out = _prepare_out(cfg)
    _stage(f"rendering {grid.n_x}x{grid.n_y} images, m={state.mode.m}, mask={state.mask.kind}")
    n_d = density_port_d(state, grid)
    c_d = coincidence_port_d(state, grid)
    c_c = coincidence_port_c(state, grid)
    s_d = rescaled_signal(c_d, n_d, cfg.imaging.floor)
    ref = reference_density(state, grid)
    window, _, ov = state.resolve(grid)
    mz = mach_zehnder_density(state.mode, state.mask, grid, window)
    masked = hom_probabilities_masked(state.mode, state.mask, window,
                                      (cfg.hom.masked_n_rho, cfg.hom.masked_n_phi), cfg.quadrature.phi_offset)
    floor = repr(cfg.imaging.floor)
    _emit_images(cfg, out, [("n_d", n_d), ("n_d_reference", ref), ("c_d", c_d), ("c_c", c_c),
                            ("s_d", s_d), ("mach_zehnder", mz)], floor)
    summary = [
        f"engine={ENGINE}",
        f"window={window!r}",
        f"I1={ov.i1.real!r},{ov.i1.imag!r}",
        f"I2={ov.i2.real!r},{ov.i2.imag!r}",
        f"overlap_quadrature_error={ov.quadrature_error!r}",
        f"c_d_total={c_d.total()!r}",
        f"hom_masked_p_cd={masked.p_cd!r}",
        f"n_d_total={n_d.total()!r}",
        f"s_d_range_bound={rescaled_range_bound(ov)!r}",
        f"s_d_valid_pixels={int(np.count_nonzero(s_d.valid))}",
    ]
    _write_text(os.path.join(out, "summary.txt"), "\n".join(summary) + "\n")
    return EXIT_OK


def cmd_snr(cfg, args):
    if args.n_tps is not None:
        cfg = _with(cfg, "snr", n_tps=args.n_tps)
    if args.n_cs is not None:
        cfg = _with(cfg, "snr", n_cs=args.n_cs)
    state, grid = _imaging_state(cfg)
    out = _prepare_out(cfg)
    _stage(f"SNR maps, N_tps={cfg.snr.n_tps}, N_cs={cfg.snr.n_cs!r}")
    c_d = coincidence_port_d(state, grid)
    window, _, _ = state.resolve(grid)
    mz = mach_zehnder_density(state.mode, state.mask, grid, window)
    _emit_images(cfg, out, [("snr_tps", snr_two_photon_map(c_d, cfg.snr.n_tps)),
                            ("snr_cs", snr_coherent_map(mz, cfg.snr.n_cs))], repr(cfg.imaging.floor))
    return EXIT_OK


def _with(cfg, section, **changes):
    text = apply_overrides(cfg.echo(), [f"{section}.{k}={v!r}" for k, v in changes.items()])
    return parse_config(text)


def _source_bitmap(cfg, grid):
    if cfg.encryption.source:
        levels, maxval = read_pgm(_read_bytes(cfg.encryption.source))
        if levels.shape != grid.shape:
            raise FormatError(f"source bitmap is {levels.shape[1]}x{levels.shape[0]}, sensor is {grid.n_x}x{grid.n_y}")
        return levels.astype(np.int64) * 2 > maxval
    return builtin_bitmaps(grid.n_x, grid.n_y, cfg.encryption.cell)["checkerboard"]


def cmd_encrypt_demo(cfg, args):
    grid = cfg.build_grid()
    bits = _source_bitmap(cfg, grid)
    mask = PhaseMask.from_bitmap(bits, grid.pitch, grid.center, step=cfg.mask.phi_max)
    out = _prepare_out(cfg)
    _stage("encryption round trip")
    q = cfg.quadrature
    rep = encryption_roundtrip(cfg.build_mode(), mask, grid, cfg.thresholds(), source=bits,
                               window=q.window if q.window is not None else grid.default_window(q.window_factor),
                               resolution=(q.n_rho, q.n_phi))
    floor = repr(cfg.imaging.floor)
    _emit_images(cfg, out, [("n_d", rep.density), ("c_d", rep.coincidence), ("s_d", rep.rescaled)], floor)
    _write_text(os.path.join(out, "source.pgm"), encode_pgm(np.where(bits, 255, 0), plain=True).decode("ascii"))
    _write_text(os.path.join(out, "recovered.pgm"),
                encode_pgm(np.where(rep.recovered, 255, 0), plain=True).decode("ascii"))
    text = "\n".join(rep.lines()) + "\n"
    _write_text(os.path.join(out, "report.txt"), text)
    sys.stdout.write(text)
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_masks(cfg, args):
    grid = cfg.build_grid()
    out = _prepare_out(cfg)
    for name, bits in sorted(builtin_bitmaps(grid.n_x, grid.n_y, cfg.encryption.cell).items()):
        path = os.path.join(out, f"mask_{name}.pgm")
        try:
            with open(path, "wb") as fh:
                fh.write(encode_pgm(np.where(bits, 255, 0)))
        except OSError as exc:
            raise FormatError(f"cannot write {path}: {exc.strerror or exc}") from None
        print(path)
    return EXIT_OK


def cmd_selftest(cfg, args):
    from .selftest import format_table, run_selftest

    results = run_selftest()
    sys.stdout.write(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


COMMANDS = {
    "probabilities": (cmd_probabilities, "analytic and numeric port probabilities as CSV"),
    "dip-scan": (cmd_dip_scan, "coincidence probability against delay as CSV"),
    "image": (cmd_image, "density, coincidence, re-scaled and coherent-baseline images"),
    "snr": (cmd_snr, "two-photon and coherent-state SNR maps"),
    "encrypt-demo": (cmd_encrypt_demo, "hide a bitmap in the phase and recover it"),
    "masks": (cmd_masks, "write the built-in binary masks as PGM"),
    "selftest": (cmd_selftest, "run the invariant checks"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for pixel kernels")
    common.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")
    common.add_argument("--family", help="state family, e.g. product_opposite, phi_minus")
    common.add_argument("--m", type=int, help="OAM quantum number")
    common.add_argument("--tau", type=float, help="delay of path B in seconds")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config entry (value parsed as JSON)")
    parser = _Parser(prog="twistedhom", description="HOM imaging simulator for twisted photon pairs")
    parser.add_argument("--version", action="version", version=ENGINE)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "snr":
            p.add_argument("--n-tps", type=int, help="number of two-photon measurements")
            p.add_argument("--n-cs", type=float, help="mean photon number of the coherent pulse")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads", "must be >= 1")
        try:
            _backend.use_backend(args.backend)
        except ValueError as exc:
            raise ConfigError("--backend", str(exc)) from None
        _backend.set_threads(args.threads)
        cfg = load_config(args)
        _stage(f"{ENGINE}, backend={_backend.name()}, threads={_backend.threads()}")
        return COMMANDS[args.command][0](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TwistedHomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code 1
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        _backend.use_backend("auto")
        _backend.set_threads(1)


if __name__ == "__main__":
    sys.exit(main())
