"""
Command line front end for the Rotating Wave Toolkit.

    rotwave zeros --nu 0,0.5 --k 1..3
    rotwave alpha-seq --n 1..10
    rotwave spectrum --alpha-n 3 --m 0 --lmax 500 --kmax 500
    rotwave sandwich --x 1 --eps 0.1 --kmax 500
    rotwave ground --alpha-n 3 --m 50 --p 3
    rotwave radial --m 100 --p 3
    rotwave scan --alpha-n 3 --p 3 --m 10,100,1000,10000
    rotwave vk --alpha 1.5 --m 1 --k 1 --p 3

Exit status: 0 on success, 1 when the result could not be written,
2 on invalid input, 3 when a numerical method did not converge.
"""

import argparse
import logging
import math
import traceback
from typing import List, Optional

import pandas as pd

from ..asymptotics.sandwich import verify_sandwich
from ..groundstate.basis import rotating_wave
from ..groundstate.nehari import ground_state
from ..groundstate.radial import complex_vk_minimizer, radial_ground_state
from ..groundstate.scan import nonradiality_scan
from ..spectrum.alpha import RESIDUAL_TOLERANCE, alpha_n
from ..spectrum.window import enumerate_spectrum, gap_constant, shifted_spectrum
from ..utils.logger import get_logger, set_console_level
from ..utils.validators import NumericError, ValidationError
from .cache import ZeroCache
from .config import RunConfig
from .export import CommandOutput, ResultExporter

logger = get_logger()

EXIT_OK = 0
EXIT_EXPORT_FAILED = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


def _velocity_options(parser: argparse.ArgumentParser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--alpha", type=float, help="Rotation velocity")
    group.add_argument("--alpha-n", dest="alpha_n", type=int, help="Use the admissible velocity alpha_n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rotwave", description="Rotating wave toolkit for the unit disk")
    parser.add_argument("--format", dest="output_format", choices=['json', 'csv'], default='json')
    parser.add_argument("--out", help="Write the result to this file instead of stdout")
    parser.add_argument("--workers", type=int, help="Worker threads for row-parallel steps")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Debug output on the console")
    verbosity.add_argument("--quiet", action="store_true", help="Only warnings and errors on the console")
    commands = parser.add_subparsers(dest="command", required=True)

    zeros = commands.add_parser("zeros", help="Bessel zeros with enclosures")
    zeros.add_argument("--nu", required=True, help="Orders, comma separated")
    zeros.add_argument("--k", dest="k_range", required=True, help="Indices a..b or comma list")

    sequence = commands.add_parser("alpha-seq", help="Admissible velocities alpha_n")
    sequence.add_argument("--n", dest="n_range", required=True, help="Indices a..b or comma list")
    sequence.add_argument("--lmax", dest="ell_max", type=int)
    sequence.add_argument("--kmax", dest="k_max", type=int)

    spectrum = commands.add_parser("spectrum", help="Enumerate the spectrum of L_{alpha,m}")
    _velocity_options(spectrum)
    spectrum.add_argument("--m", type=float)
    spectrum.add_argument("--mu", type=float, help="Enumerate the shifted operator instead")
    spectrum.add_argument("--lmax", dest="ell_max", type=int)
    spectrum.add_argument("--kmax", dest="k_max", type=int)
    spectrum.add_argument("--kernel-tol", dest="kernel_tol", type=float)

    sandwich = commands.add_parser("sandwich", help="Finite-index scan of j_{xk,k}/k - iota(x)")
    sandwich.add_argument("--x", type=float)
    sandwich.add_argument("--eps", type=float)
    sandwich.add_argument("--kmin", dest="k_min", type=int)
    sandwich.add_argument("--kmax", dest="k_max", type=int)

    ground = commands.add_parser("ground", help="Generalized Nehari ground state")
    _velocity_options(ground)
    ground.add_argument("--m", type=float)
    ground.add_argument("--p", type=float)
    ground.add_argument("--j-cut", dest="j_cut", type=float)
    ground.add_argument("--starts", type=int)
    ground.add_argument("--tolerance", type=float)
    ground.add_argument("--wave", help="Also write the rotating wave on a polar grid (CSV) to this file")
    ground.add_argument("--time", type=float, default=0.0, help="Time at which the rotating wave is sampled")

    radial = commands.add_parser("radial", help="Radial ground state level")
    radial.add_argument("--m", type=float)
    radial.add_argument("--p", type=float)
    radial.add_argument("--nodes", type=int)

    scan = commands.add_parser("scan", help="Ground state level against the radial level")
    _velocity_options(scan)
    scan.add_argument("--p", type=float)
    scan.add_argument("--m", dest="m_grid", required=True, help="Masses, comma separated")
    scan.add_argument("--solve", action="store_true", help="Compute the ground state at every mass")
    scan.add_argument("--j-cut", dest="j_cut", type=float)
    scan.add_argument("--starts", type=int)

    vk = commands.add_parser("vk", help="Constrained minimiser on V_k")
    _velocity_options(vk)
    vk.add_argument("--m", type=float)
    vk.add_argument("--k", dest="angular", type=int)
    vk.add_argument("--p", type=float)
    vk.add_argument("--nodes", type=int)
    return parser


def cmd_zeros(config: RunConfig, cache: Optional[ZeroCache] = None) -> CommandOutput:
    cache = cache or ZeroCache()
    rows = []
    for nu in config.nu:
        for zero in cache.zeros(nu, config.k_range):
            row = zero.to_dict()
            row['inside'] = zero.contains(zero.value)
            rows.append(row)
    cache.save()
    return CommandOutput('zeros', {}, pd.DataFrame(rows, columns=['nu', 'k', 'value', 'lower', 'upper', 'inside']))


def cmd_alpha_seq(config: RunConfig) -> CommandOutput:
    rows = []
    for n in config.n_range:
        admissible = alpha_n(n)
        estimate = gap_constant(admissible.alpha, 0.0, config.ell_max, config.k_max, workers=config.workers)
        admissible.c_empirical = estimate.c_estimate
        admissible.gap_argmin = estimate.argmin
        admissible.gap_cutoffs = (config.ell_max, config.k_max)
        row = admissible.to_dict()
        row['residual_ok'] = admissible.residual <= RESIDUAL_TOLERANCE * max(1.0, math.pi * n)
        rows.append(row)
    frame = pd.DataFrame(rows)
    return CommandOutput('alpha-seq', {'cutoffs': [config.ell_max, config.k_max]}, frame)


def cmd_spectrum(config: RunConfig) -> CommandOutput:
    alpha = config.velocity()
    if config.mu is None:
        window = enumerate_spectrum(alpha, config.m, config.ell_max, config.k_max, config.kernel_tol, config.workers)
    else:
        window = shifted_spectrum(alpha, config.m, config.mu, config.ell_max, config.k_max,
                                  config.kernel_tol, config.workers)
    return CommandOutput('spectrum', window.summary(), window.frame, embed_rows=False)


def cmd_sandwich(config: RunConfig) -> CommandOutput:
    report = verify_sandwich(config.x, config.eps, config.k_min, config.k_max, workers=config.workers)
    return CommandOutput('sandwich', report.summary(), report.to_frame())


def cmd_ground(config: RunConfig) -> CommandOutput:
    result = ground_state(
        config.velocity(), config.m, config.p, j_cut=config.j_cut, kernel_tol=config.kernel_tol,
        starts=config.starts, tolerance=config.tolerance, workers=config.workers,
    )
    frame = pd.DataFrame(result.basis.coefficient_table(result.coefficients),
                         columns=['ell', 'k', 'parity', 'value'])
    output = CommandOutput('ground', result.to_dict(), frame, embed_rows=False)
    if config.wave:
        wave = rotating_wave(result.basis, result.coefficients, result.alpha, config.time)
        written = ResultExporter().export(CommandOutput('wave', {}, wave), 'csv', config.wave)
        if not written.success:
            output.failed_exports.append(config.wave)
    return output


def cmd_radial(config: RunConfig) -> CommandOutput:
    result = radial_ground_state(config.m, config.p, nodes=config.nodes)
    return CommandOutput('radial', result.to_dict(), result.to_frame(), embed_rows=False)


def cmd_scan(config: RunConfig) -> CommandOutput:
    report = nonradiality_scan(
        config.velocity(), config.p, config.m_grid, solve=config.solve,
        j_cut=config.j_cut, starts=config.starts,
    )
    return CommandOutput('scan', report.summary(), report.to_frame())


def cmd_vk(config: RunConfig) -> CommandOutput:
    result = complex_vk_minimizer(config.velocity(), config.m, config.angular, config.p, nodes=config.nodes)
    return CommandOutput('vk', result.to_dict(), result.to_frame(), embed_rows=False)


COMMANDS = {
    'zeros': cmd_zeros,
    'alpha-seq': cmd_alpha_seq,
    'spectrum': cmd_spectrum,
    'sandwich': cmd_sandwich,
    'ground': cmd_ground,
    'radial': cmd_radial,
    'scan': cmd_scan,
    'vk': cmd_vk,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, validate, dispatch and export; returns the exit status."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_console_level(logging.DEBUG)
    elif args.quiet:
        set_console_level(logging.WARNING)

    try:
        config = RunConfig.from_args(args).validate()
        output = COMMANDS[config.command](config)
    except ValidationError as e:
        logger.error(f"Invalid input: {str(e)}")
        return EXIT_VALIDATION
    except NumericError as e:
        logger.error(f"Numerical failure: {str(e)}")
        logger.debug(f"Traceback: {traceback.format_exc()}")
        return EXIT_NUMERIC

    result = ResultExporter().export(output, config.output_format, config.out)
    if not result.success:
        return EXIT_EXPORT_FAILED
    if output.failed_exports:
        logger.error(f"Side outputs not written: {', '.join(output.failed_exports)}")
        return EXIT_EXPORT_FAILED
    return EXIT_OK
