"""
Kommandozeile für den Serrin Vortex Solver

Subkommandos: analytic, solve-inviscid, solve-viscous, sweep, layer-scaling,
fields, verify. Exit-Codes stammen aus den Fehlerklassen.
"""

import logging
import os
from argparse import ArgumentParser, Namespace
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from . import __version__
from .analytic import inviscid_b1, trivial_solution
from .config import RunConfig, load_config
from .exceptions import ValidationError, VerificationError, VortexError
from .fields import (classify_stability, integrate_streamline, powerlaw_exponent,
                     pressure_grid, speed_grid, velocity_grid)
from .model import Kind, Mesh, VortexParams, profile_flux
from .persistence import load_profile, save_profile, write_csv, write_json
from .residuals import (EquationId, GoverningMode, continuity_residuals, fullfield_ns_residual,
                        governing_residuals, reports_to_frame)
from .solvers.inviscid import feasibility_survey, solve_inviscid, sweep_b, sweep_c, sweep_frame
from .solvers.viscous import (ViscousProblem, calibrate_closure, check_nu_list, delta_sensitivity,
                              fit_layer_slope, layer_size, solve_layer_runs, solve_serrin_b1)

logger = logging.getLogger(__name__)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise ValidationError(f"expected a comma-separated list of numbers, got {text!r}")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog='serrin_vortex', description="Swirling vortex similarity solutions")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--config', help="JSON file overriding the defaults")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true')
    verbosity.add_argument('--quiet', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    analytic = sub.add_parser('analytic', help="closed-form b=1 family or trivial rotation")
    analytic.add_argument('--C1', type=float, default=None)
    analytic.add_argument('--C-omega', dest='C_omega', type=float, default=None)
    analytic.add_argument('--b', type=float, default=1.0, help="exponent for the trivial solution (C1=0)")
    analytic.add_argument('--h', type=float, default=None)
    analytic.add_argument('--output', default='solution.json')

    inviscid = sub.add_parser('solve-inviscid', help="Newton solve for 0<b<1")
    inviscid.add_argument('--b', type=float, default=None)
    inviscid.add_argument('--c', type=float, default=None)
    inviscid.add_argument('--h', type=float, default=None)
    inviscid.add_argument('--tol', type=float, default=None)
    inviscid.add_argument('--max-iter', dest='max_iter', type=int, default=None)
    inviscid.add_argument('--output', default='solution.json')
    inviscid.add_argument('--report', default=None, help="JSON convergence report")

    viscous = sub.add_parser('solve-viscous', help="Serrin's viscous system for b=1")
    group = viscous.add_mutually_exclusive_group()
    group.add_argument('--nu', type=float, default=None)
    group.add_argument('--k', type=float, default=None, help="k = 1/(2 nu)")
    viscous.add_argument('--C-omega', dest='C_omega', type=float, default=None)
    viscous.add_argument('--h', type=float, default=None)
    viscous.add_argument('--closure', type=float, default=None)
    viscous.add_argument('--calibrate', action='store_true')
    viscous.add_argument('--delta', type=float, default=None)
    viscous.add_argument('--output', default='solution.json')

    sweep = sub.add_parser('sweep', help="continuation in b or c")
    lists = sweep.add_mutually_exclusive_group(required=True)
    lists.add_argument('--b-list', dest='b_list', default=None)
    lists.add_argument('--c-list', dest='c_list', default=None)
    sweep.add_argument('--b', type=float, default=None)
    sweep.add_argument('--c', type=float, default=None)
    sweep.add_argument('--h', type=float, default=None)
    sweep.add_argument('--survey-c-list', dest='survey_c_list', default=None,
                       help="cold-start survey over b-list x this c-list")
    sweep.add_argument('--output-dir', dest='output_dir', default='sweep')

    layer = sub.add_parser('layer-scaling', help="boundary-layer thickness versus nu")
    layer.add_argument('--nu-list', dest='nu_list', default=None)
    layer.add_argument('--delta', type=float, default=None)
    layer.add_argument('--deltas', default=None, help="thresholds for the sensitivity table")
    layer.add_argument('--output', default='layer_scaling.csv')

    fields = sub.add_parser('fields', help="grids, streamlines and power-law fits")
    fields.add_argument('solution')
    fields.add_argument('--quantity', choices=('speed', 'pressure', 'velocity'), default=None)
    fields.add_argument('--grid-output', dest='grid_output', default='grid.csv')
    fields.add_argument('--T', type=float, default=None)
    fields.add_argument('--streamline', default=None, help="start point x,y,z")
    fields.add_argument('--dt', type=float, default=None)
    fields.add_argument('--max-steps', dest='max_steps', type=int, default=None)
    fields.add_argument('--streamline-output', dest='streamline_output', default='streamline.csv')
    fields.add_argument('--powerlaw', action='store_true')
    fields.add_argument('--z0', type=float, default=None)
    fields.add_argument('--powerlaw-output', dest='powerlaw_output', default='powerlaw.json')

    verify = sub.add_parser('verify', help="residual gate for a solution file")
    verify.add_argument('solution')
    verify.add_argument('--mode', choices=['auto'] + [m.value for m in GoverningMode], default='auto')
    verify.add_argument('--fullfield', action='store_true')
    verify.add_argument('--spacing', type=float, default=1e-3)
    verify.add_argument('--output-dir', dest='output_dir', default=None)
    return parser


def _mesh(h: Optional[float], default: float) -> Mesh:
    return Mesh.from_step(h if h is not None else default)


def cmd_analytic(args: Namespace, config: RunConfig) -> int:
    C1 = args.C1 if args.C1 is not None else config.inviscid.limit_C1
    C_omega = args.C_omega if args.C_omega is not None else config.inviscid.limit_C_omega
    if C1 == 0:
        profile = trivial_solution(VortexParams(b=args.b, nu=0.0, C_omega=C_omega))
    else:
        if args.b != 1.0:
            raise ValidationError("the closed-form family with C1 != 0 exists only for b=1")
        profile = inviscid_b1(C1, C_omega)
    save_profile(profile, args.output, _mesh(args.h, config.inviscid.h))
    return 0


def cmd_solve_inviscid(args: Namespace, config: RunConfig) -> int:
    b = args.b if args.b is not None else config.inviscid.b
    c = args.c if args.c is not None else config.inviscid.c
    newton = config.newton
    if args.tol is not None:
        newton.tol = args.tol
    if args.max_iter is not None:
        newton.max_iter = args.max_iter
    mesh = _mesh(args.h, config.inviscid.h)
    profile, solution = solve_inviscid(b, c, mesh, newton)
    save_profile(profile, args.output, mesh)
    if args.report:
        write_json({'b': b, 'c': c, **solution.to_dict()}, args.report)
    return 0


def cmd_solve_viscous(args: Namespace, config: RunConfig) -> int:
    vc = config.viscous
    if args.k is not None:
        if not args.k > 0:
            raise ValidationError(f"k must be > 0, got {args.k}")
        nu = 1.0 / (2.0 * args.k)
    else:
        nu = args.nu if args.nu is not None else vc.nu
    h = args.h if args.h is not None else vc.h
    mesh = Mesh.from_step(h) if h is not None else None
    problem = ViscousProblem(nu, args.C_omega if args.C_omega is not None else vc.C_omega, mesh,
                             args.closure if args.closure is not None else vc.closure, config.newton)
    if args.calibrate or vc.calibrate:
        closure = calibrate_closure(problem, vc.calibration_window,
                                    continuation_start=vc.continuation_start,
                                    continuation_factor=vc.continuation_factor)
        problem = problem.with_nu(nu, closure)
    profile = solve_serrin_b1(problem, vc.continuation_start, vc.continuation_factor)
    delta = args.delta if args.delta is not None else vc.delta
    x_star = layer_size(profile, delta)
    profile = profile.with_metadata(layer_x=x_star, delta=delta)
    logger.info(f"Layer size x*={x_star:.5f} at delta={delta:g}")
    save_profile(profile, args.output, problem.mesh)
    return 0


def cmd_sweep(args: Namespace, config: RunConfig) -> int:
    ic = config.inviscid
    mesh = _mesh(args.h, ic.h)
    limit = (ic.limit_C1, ic.limit_C_omega)
    if args.survey_c_list:
        if not args.b_list:
            raise ValidationError("--survey-c-list requires --b-list")
        frame = feasibility_survey(_floats(args.b_list), _floats(args.survey_c_list), mesh,
                                   config.newton, config.threads)
        write_csv(frame, os.path.join(args.output_dir, 'survey.csv'))
        return 0

    if args.b_list:
        entries = sweep_b(_floats(args.b_list), args.c if args.c is not None else ic.c, mesh,
                          config.newton, limit)
    else:
        entries = sweep_c(_floats(args.c_list), args.b if args.b is not None else ic.b, mesh,
                          config.newton, limit)
    for entry in entries:
        if entry.converged:
            save_profile(entry.profile, os.path.join(args.output_dir, f"b_{entry.b:g}_c_{entry.c:g}.json"), mesh)
    write_csv(sweep_frame(entries), os.path.join(args.output_dir, 'summary.csv'))
    failed = [e for e in entries if not e.converged]
    if failed:
        logger.warning(f"{len(failed)} sweep entries did not converge")
    return 0


def cmd_layer_scaling(args: Namespace, config: RunConfig) -> int:
    vc = config.viscous
    nus = _floats(args.nu_list) if args.nu_list else list(vc.nu_list)
    delta = args.delta if args.delta is not None else vc.delta
    check_nu_list(nus)
    runs = solve_layer_runs(nus, vc.C_omega, config.newton, vc.continuation_start,
                            vc.continuation_factor, config.threads)
    frame = pd.DataFrame({'nu': [nu for nu, _ in runs],
                          'layer_x': [layer_size(profile, delta) for _, profile in runs]})
    slope = fit_layer_slope(frame['nu'], frame['layer_x'])
    logger.info(f"Layer scaling slope {slope:.4f} (delta={delta:g})")
    write_csv(frame, args.output)
    if args.deltas:
        root, ext = os.path.splitext(args.output)
        write_csv(delta_sensitivity(runs, _floats(args.deltas)), f"{root}_delta{ext or '.csv'}")
    return 0


def cmd_fields(args: Namespace, config: RunConfig) -> int:
    fc = config.fields
    profile = load_profile(args.solution)
    grid = dict(r_range=fc.r_range, z_range=fc.z_range, n_r=fc.n_r, n_z=fc.n_z)
    if args.quantity == 'speed':
        write_csv(speed_grid(profile, **grid).to_frame(), args.grid_output)
    elif args.quantity == 'pressure':
        T = args.T if args.T is not None else fc.T
        write_csv(pressure_grid(profile, T=T, **grid).to_frame(), args.grid_output)
    elif args.quantity == 'velocity':
        write_csv(velocity_grid(profile, **grid).to_frame(), args.grid_output)

    if args.streamline:
        start = _floats(args.streamline)
        if len(start) != 3:
            raise ValidationError("--streamline expects x,y,z")
        line = integrate_streamline(profile, start, args.dt or fc.dt, args.max_steps or fc.max_steps)
        if profile.params.b != 2:
            logger.info(f"Streamline psi drift {line.psi_drift(profile):.3e}")
        write_csv(line.to_frame(), args.streamline_output)

    if args.powerlaw:
        z0 = args.z0 if args.z0 is not None else fc.z0
        r_samples = np.geomspace(fc.r_window[0], fc.r_window[1], fc.n_samples)
        exponent = powerlaw_exponent(profile, z0, r_samples)
        fit = {'b': profile.params.b, 'exponent': exponent, 'z0': z0,
               'r_window': [float(r_samples[0]), float(r_samples[-1])], 'n_samples': int(r_samples.size)}
        write_json(fit, args.powerlaw_output)
        print(f"power-law exponent {exponent:.6f} at z0={z0:g}, r in [{r_samples[0]:g}, {r_samples[-1]:g}]")
        logger.info(f"Power-law fit written to {args.powerlaw_output}")
    return 0


def cmd_verify(args: Namespace, config: RunConfig) -> int:
    vc = config.verify
    profile = load_profile(args.solution)
    params = profile.params
    mesh = profile.mesh or Mesh.from_step(config.inviscid.h)
    mode = None if args.mode == 'auto' else GoverningMode(args.mode)
    nodes = mesh.trimmed(vc.trim)
    reports = governing_residuals(profile, params, nodes=nodes, mode=mode)
    tol = vc.closed_form_tol if profile.kind == Kind.CLOSED_FORM else vc.sampled_tol
    failures = [r for r in reports if not r.passes(tol)]
    summary = {'mode': (mode or GoverningMode.select(params)).value, 'tol': tol,
               'reports': [r.summary() for r in reports]}

    if params.b != 2:
        if profile.kind == Kind.SAMPLED and all(r.equation_id != EquationId.CONTINUITY for r in reports):
            # der Fluss folgt aus f, also muss g zu f passen
            continuity = continuity_residuals(profile, nodes=nodes)
            reports = reports + [continuity]
            summary['reports'].append(continuity.summary())
            if not continuity.passes(tol):
                failures.append(continuity)
        flux = profile_flux(profile)
        summary['flux'] = flux
        if abs(flux) > vc.flux_tol:
            logger.error(f"Flux integral {flux:.3e} exceeds {vc.flux_tol:.1e}")
            failures.append('flux')

    if args.fullfield:
        field_reports = fullfield_ns_residual(profile, params, spacing=args.spacing)
        summary['fullfield'] = [r.summary() for r in field_reports]
        failures.extend(r for r in field_reports if r.sup_norm > 1e-3)
        reports = reports + field_reports

    stability = classify_stability(profile, params, mesh=mesh, tol=vc.stability_tol)
    summary['stability'] = stability.to_dict()

    if args.output_dir:
        write_csv(reports_to_frame(reports), os.path.join(args.output_dir, 'residuals.csv'))
        write_json(summary, os.path.join(args.output_dir, 'summary.json'))

    for report in reports:
        logger.info(f"{report.equation_id.value}: sup={report.sup_norm:.3e}, relative={report.relative_sup:.3e}")
    if failures:
        raise VerificationError(f"{len(failures)} check(s) above threshold", reports)
    logger.info("Verification passed")
    return 0


COMMANDS = {
    'analytic': cmd_analytic,
    'solve-inviscid': cmd_solve_inviscid,
    'solve-viscous': cmd_solve_viscous,
    'sweep': cmd_sweep,
    'layer-scaling': cmd_layer_scaling,
    'fields': cmd_fields,
    'verify': cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)

    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except VortexError as error:
        logger.error(f"{type(error).__name__}: {error}")
        return error.exit_code
