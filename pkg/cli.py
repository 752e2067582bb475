#!/usr/bin/env python3
"""
Command-line front end for DelassusBench

Generator specs (--gen):
  chain:N[:joint[:base]]   joint in revolute, prismatic, spherical, free; base fixed or floating
  stem:S:B[:L]             floating stem of S links with B welded branches per side
  chain-md:K               chain of K*K links welded every K links
  chain-all:N              chain of N links, every link welded
  example                  six-link example tree with three welds
  humanoid[:FEET[:HANDS]]  floating humanoid; FEET connect4 (default), weld6 or none;
                           HANDS none (default), weld6 or fingertips
  hand                     fixed-base 24-DoF hand with a point contact per fingertip
  random:N[:C]             random tree with C constraints, seeded by --seed

Constraint specs (--constrain): comma-separated LINK:KIND where LINK is a
number, tip or all and KIND is weld or connect[@x;y;z]. @FILE reads the
entries from FILE, one or more per line, with # comments.

Exit codes: 0 success, 1 verify tolerance violation, 2 model or
specification error, 3 numerical failure.
"""
import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.config import Config
from src.tools.bench import normalize_family, parse_range
from src.tools.metering import reports_frame
from src.utils.errors import DelassusError, SpecError
from src.utils.log import configure_logging
from src.workflows.delassus_workflow import DelassusWorkflow, format_info, format_matrix, load_mechanism


def _split(text: Optional[str]) -> Optional[List[str]]:
    return [part.strip() for part in text.split(',') if part.strip()] if text else None


def _add_model_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--gen', help='generator spec, e.g. chain:5:revolute or stem:20:2')
    source.add_argument('--model', help='URDF (.urdf) or JSON model file')
    parser.add_argument('--base', choices=['fixed', 'floating'], default='fixed', help='base joint for URDF models')
    parser.add_argument('--constrain', help='extra constraints, e.g. tip:weld or 3:connect@0.1;0;0, or @FILE')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='delassus',
        description='Delassus matrices of constrained kinematic trees by five algorithms',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__
    )
    parser.add_argument('--log-level', default=None, help='logging level (default from LOG_LEVEL)')
    parser.add_argument('--verbose', action='store_true', help='print workflow steps')
    sub = parser.add_subparsers(dest='command', required=True)

    compute = sub.add_parser('compute', help='print the Delassus matrix from one algorithm')
    _add_model_arguments(compute)
    compute.add_argument('--algo', default='pv_osimr', help='naive, ltl, pv-osim, efpa or pv-osimr')
    compute.add_argument('--configuration', choices=['neutral', 'random'], default='neutral')
    compute.add_argument('--seed', type=int, default=Config.DEFAULT_SEED)
    compute.add_argument('--format', choices=['matrix', 'csv'], default='matrix')
    compute.add_argument('--output', help='write the matrix here instead of stdout')
    compute.add_argument('--corrupt', help=argparse.SUPPRESS)

    verify = sub.add_parser('verify', help='check pairwise agreement at random configurations')
    _add_model_arguments(verify)
    verify.add_argument('--algos', help='comma-separated subset (default: all five)')
    verify.add_argument('--samples', type=int, default=Config.VERIFY_SAMPLES)
    verify.add_argument('--tolerance', type=float, default=Config.DEFAULT_TOLERANCE)
    verify.add_argument('--seed', type=int, default=Config.DEFAULT_SEED)
    verify.add_argument('--corrupt', help=argparse.SUPPRESS)

    count = sub.add_parser('count', help='scalar operation counts per algorithm')
    _add_model_arguments(count)
    count.add_argument('--algos', help='comma-separated subset (default: all five)')
    count.add_argument('--seed', type=int, default=Config.DEFAULT_SEED)
    count.add_argument('--format', choices=['table', 'csv'], default='table')
    count.add_argument('--output', help='write the report here instead of stdout')

    bench = sub.add_parser('bench', help='operation counts over a mechanism family with slope fits')
    bench.add_argument('--family', required=True, help='stem, chain-md or chain-all')
    bench.add_argument('--k', help='k range for chain-md, e.g. 4..10')
    bench.add_argument('--n', help='chain lengths for chain-all, e.g. 8,12,16')
    bench.add_argument('--stem', help='stem lengths for stem, e.g. 5..40:5')
    bench.add_argument('--branches', type=int, help='branches per side for stem')
    bench.add_argument('--branch-len', type=int, default=Config.BRANCH_LENGTH)
    bench.add_argument('--algos', help='comma-separated subset (default: pv-osim,efpa,pv-osimr)')
    bench.add_argument('--tail', type=int, default=Config.SLOPE_TAIL, help='points used by each slope fit')
    bench.add_argument('--workers', type=int, default=Config.BENCH_WORKERS)
    bench.add_argument('--format', choices=['csv', 'table'], default='csv')
    bench.add_argument('--output', help='CSV path; stdout when omitted')

    info = sub.add_parser('info', help='model summary and index sets')
    _add_model_arguments(info)
    info.add_argument('--seed', type=int, default=Config.DEFAULT_SEED)
    return parser


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + '\n')
    else:
        print(text)


def _bench_params(args: argparse.Namespace, family: str) -> List[int]:
    text = {'chain_md': args.k, 'chain_all_constrained': args.n, 'stem_branches': args.stem}.get(family)
    if text is None:
        flag = {'chain_md': '--k', 'chain_all_constrained': '--n', 'stem_branches': '--stem'}.get(family, '--k')
        raise SpecError(f'{family} needs {flag}')
    return parse_range(text)


def run(args: argparse.Namespace) -> int:
    """Dispatch one subcommand and return its exit code"""
    workflow = DelassusWorkflow(verbose=args.verbose)
    try:
        if args.command == 'bench':
            family = normalize_family(args.family)
            result = workflow.bench(
                family, _bench_params(args, family), _split(args.algos),
                branches_per_side=args.branches, branch_len=args.branch_len,
                output_path=args.output, tail=args.tail, workers=args.workers
            )
            if result['success']:
                if args.format == 'table':
                    print(result['frame'].to_string(index=False))
                elif not args.output:
                    print(result['csv'], end='')
                if result['summary']:
                    # Keep stdout parseable when it carries the CSV
                    stream = sys.stderr if args.format == 'csv' and not args.output else sys.stdout
                    print(result['summary'], file=stream)
        else:
            mechanism = load_mechanism(args.gen, args.model, args.base, args.constrain, args.seed)
            if args.command == 'compute':
                result = workflow.compute(mechanism, args.algo, args.configuration, args.seed, args.corrupt)
                if result['success']:
                    matrix = result['matrix']
                    text = format_matrix(matrix)
                    if args.format == 'csv':
                        text = text.replace(' ', ',')
                    _emit(text, args.output)
            elif args.command == 'verify':
                result = workflow.verify(mechanism, args.samples, args.tolerance, args.seed,
                                         _split(args.algos), args.corrupt)
                if result['worst_pair'] is not None:
                    a, b = result['worst_pair']
                    print(f"max relative deviation {result['max_deviation']:.3e} ({a} vs {b}) "
                          f"over {result['samples']} samples")
            elif args.command == 'count':
                result = workflow.count(mechanism, _split(args.algos))
                if result['success']:
                    text = result['table'] if args.format == 'table' else \
                        reports_frame(result['reports']).to_csv(index=False).rstrip('\n')
                    _emit(text, args.output)
            else:
                result = workflow.info(mechanism)
                if result['success']:
                    print(format_info(result))
    except DelassusError as e:
        print(f'error: {e}', file=sys.stderr)
        return e.exit_code

    if not result['success']:
        print(f"error: {result['error']}", file=sys.stderr)
    return result['exit_code']


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    return run(args)


if __name__ == '__main__':
    sys.exit(main())
