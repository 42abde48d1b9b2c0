import argparse
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import pandas as pd
from sacred import SETTINGS, Experiment
from sacred.observers import FileStorageObserver
from sacred.utils import SacredError

from rnapbound.bounders import ApproxBounder, BoundMode, ExactBounder, HybridBounder
from rnapbound.common.bound_cache import BoundCache
from rnapbound.common.errors import ConfigError, InputError, PBoundError
from rnapbound.common.logger import SCHEMA_VERSION, BenchLogger
from rnapbound.common.util import dumps, format_prob
from rnapbound.decomp import DecompConfig, count_decompositions, structure_pbound
from rnapbound.energy import DEFAULT_PARAMS, EnergyModel, load_params, params_digest
from rnapbound.oracle import run_oracle
from rnapbound.structure import Structure, build_loop_tree, read_structures

SETTINGS.CAPTURE_MODE = 'no'

pbound_ex = Experiment('rnapbound', save_git_info=False)
logger = logging.getLogger('rnapbound')

OUTPUT_FORMATS = ('text', 'json', 'csv')


# This file uses Sacred for config management. Every library object is built
# from the config by the captured factories below, and each subcommand is a
# sacred command started through main().
@pbound_ex.config
def pbound_config():
    # Inputs
    input_path = None               # structure file (analyze, count) or directory (bench)
    params_path = DEFAULT_PARAMS    # energy parameter file
    cache_path = os.environ.get('PBOUND_CACHE')  # JSON-lines bound cache, None keeps it in memory

    # Energy model
    rt = 0.6163                     # RT in kcal/mol
    min_hairpin = 3                 # least unpaired bases in a hairpin
    max_interior = 30               # largest bulge / internal loop folded
    log_space = False               # partition sums in log space
    no_lonely_pairs = False         # reject structures with isolated pairs

    # Decomposition
    max_depth = 5                   # levels of loops per candidate motif
    max_width = 3                   # loops on one level of a candidate
    max_loops = 6                   # loops per candidate
    eval_leaf_hairpins = False      # bound hairpin leaves instead of taking 1
    mode = 'hybrid'                 # hybrid, approx_only, exact_only, no_decomposition

    # Bounds
    exact_len = 14                  # longest motif bounded exhaustively
    exact_max_sequences = 5000      # largest design space bounded exhaustively, even within exact_len
    samples = 100                   # sequences folded to find rivals
    seed = 2025                     # seed of rival sampling
    retries = 1                     # extra sampling rounds (seed + k) when no rival is found
    max_assignments = 10 ** 7       # enumeration cap of the ensemble approximation

    # Output and execution
    output_format = 'text'          # text, json or csv
    output_path = None              # also write the report (and timings) here
    explain = False                 # add argmax assignments and per-rival gaps
    jobs = 1                        # worker threads
    cache_action = 'inspect'        # cache subcommand: inspect or compact
    oracle_scale = 0.1              # trial count factor of the oracle suite


@pbound_ex.capture
def validate_config(rt, min_hairpin, max_interior, max_depth, max_width, max_loops, exact_len,
                    exact_max_sequences, samples, retries, max_assignments, output_format, jobs, mode,
                    oracle_scale):
    positive = dict(rt=rt, max_depth=max_depth, max_width=max_width, max_loops=max_loops, exact_len=exact_len,
                    exact_max_sequences=exact_max_sequences, samples=samples, max_assignments=max_assignments,
                    jobs=jobs, oracle_scale=oracle_scale)
    for name, value in positive.items():
        if value is None or not value > 0:
            raise ConfigError("{} must be positive, got {!r}".format(name, value))
    if min_hairpin < 0 or max_interior < 0 or retries < 0:
        raise ConfigError("min_hairpin, max_interior and retries must be non-negative")
    if output_format not in OUTPUT_FORMATS:
        raise ConfigError("unknown format {!r}, expected one of {}".format(output_format, ', '.join(OUTPUT_FORMATS)))
    BoundMode.parse(mode)


@pbound_ex.capture
def make_model(params_path, rt, min_hairpin, max_interior) -> EnergyModel:
    return load_params(params_path, rt=rt, min_hairpin=min_hairpin, max_interior=max_interior)


@pbound_ex.capture
def make_params_hash(model, mode, exact_len, exact_max_sequences, samples, seed, retries,
                     max_assignments) -> str:
    """Digest of everything a motif bound depends on."""
    return params_digest(model, mode=mode, exact_len=exact_len, exact_max_sequences=exact_max_sequences,
                         samples=samples, seed=seed, retries=retries, max_assignments=max_assignments)


@pbound_ex.capture
def make_decomp_config(max_depth, max_width, max_loops, exact_len, eval_leaf_hairpins, mode) -> DecompConfig:
    return DecompConfig(max_depth=max_depth, max_width=max_width, max_loops=max_loops, exact_len_cap=exact_len,
                        eval_leaf_hairpins=eval_leaf_hairpins, mode=mode)


@pbound_ex.capture
def make_bounder(model, params_hash, mode, exact_len, exact_max_sequences, samples, seed, retries,
                 max_assignments, jobs, explain, log_space) -> HybridBounder:
    """
    The bound_fn of the decomposition. The parameters are meant to be filled
    by sacred, and are therefore documented in the configuration function.
    """
    exact = ExactBounder(model, params_hash, exact_len, exact_max_sequences, log_space)
    approx = ApproxBounder(model, params_hash, samples, seed, retries, max_assignments, jobs, explain)
    return HybridBounder(exact, approx, mode)


@pbound_ex.capture
def make_cache(cache_path) -> BoundCache:
    return BoundCache(cache_path)


@pbound_ex.capture
def load_structures(input_path, min_hairpin, max_interior, no_lonely_pairs) -> List[Tuple[str, Structure]]:
    if input_path is None:
        raise InputError("no input file given")
    return read_structures(input_path, min_hairpin=min_hairpin, allow_lonely=not no_lonely_pairs,
                           max_interior=max_interior)


def _motif_record(m, r, explain):
    out = r.to_dict(explain)
    # records are shared by key; place the argmax on this motif's own positions
    if explain and r.assignment is not None:
        out['assignment'] = {str(m.span_positions[k]): nt for k, nt in sorted(r.assignment.items())}
    return out


def _analysis(name, y, record, result, explain):
    return {
        'name': name,
        'structure': y.dotbracket,
        'length': y.length,
        'record': record.to_dict(explain),
        'motifs': [{'key': m.key, 'loops': sorted(m.node_ids), 'record': _motif_record(m, r, explain)}
                   for m, r in result.motifs],
    }


def render_analysis(analyses, output_format, rt=None, exact_limits=None) -> str:
    if output_format == 'json':
        return dumps({'schema_version': SCHEMA_VERSION, 'rt': rt, 'exact_limits': exact_limits,
                      'structures': analyses}) + '\n'
    if output_format == 'csv':
        rows = []
        for a in analyses:
            for idx, motif in enumerate(a['motifs']):
                r = motif['record']
                rows.append({'name': a['name'], 'structure_pbound': a['record']['pbound'],
                             'count_explored': a['record']['count_explored'], 'motif': idx, 'key': motif['key'],
                             'pbound': r['pbound'], 'method': r['method'], 'ddg_max': r['ddg_max'],
                             'rival_count': r['rival_count'], 'umfe_undesignable': r['umfe_undesignable']})
        columns = ['name', 'structure_pbound', 'count_explored', 'motif', 'key', 'pbound', 'method', 'ddg_max',
                   'rival_count', 'umfe_undesignable']
        return pd.DataFrame(rows, columns=columns).to_csv(index=False, float_format='%.10g', lineterminator='\n')
    lines = []
    for a in analyses:
        record = a['record']
        lines.append('>{}'.format(a['name']))
        lines.append(a['structure'])
        lines.append('pbound: {}'.format(format_prob(record['pbound'])))
        lines.append('decompositions explored: {}'.format(record['count_explored']))
        lines.append('umfe undesignable: {}'.format('yes' if record['umfe_undesignable'] else 'no'))
        for motif in a['motifs']:
            r = motif['record']
            lines.append('  {:<40} {:>10} {}'.format(motif['key'], format_prob(r['pbound']), r['method']))
            if r.get('assignment'):
                lines.append('    argmax: {}'.format(' '.join('{}={}'.format(pos, nt)
                                                               for pos, nt in r['assignment'].items())))
    return '\n'.join(lines) + '\n'


def _write(text, output_path=None):
    sys.stdout.write(text)
    sys.stdout.flush()
    if output_path is not None:
        with open(output_path, 'w', encoding='utf-8') as fp:
            fp.write(text)


@pbound_ex.command
def analyze(_run, _log, output_format, output_path, explain, jobs, exact_len, exact_max_sequences):
    """
    Bounds every structure of the input file and prints the optimal
    decomposition with the bound of each motif.
    """
    validate_config()
    structures = load_structures()
    model = make_model()
    params_hash = make_params_hash(model)
    bounder = make_bounder(model, params_hash)
    cfg = make_decomp_config()
    cache = make_cache()

    analyses = []
    executor = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for name, y in structures:
            t_start = time.time()
            record, result = structure_pbound(y, cfg, cache, bounder, params_hash, key=name, executor=executor)
            _log.info('%s: pbound %s from %d motifs (%d bound calls, %.2fs)', name, format_prob(record.pbound),
                      len(result.motifs), result.bound_calls, time.time() - t_start)
            _run.log_scalar('analyze.pbound', record.pbound)
            analyses.append(_analysis(name, y, record, result, explain))
    finally:
        if executor is not None:
            executor.shutdown()
    limits = {'len': exact_len, 'max_sequences': exact_max_sequences}
    _write(render_analysis(analyses, output_format, model.rt, limits), output_path)
    return 0


def _bench_inputs(input_path, _log, bench_logger_errors):
    if input_path is None or not os.path.isdir(input_path):
        raise InputError("bench needs a directory, got {!r}".format(input_path))
    entries = []
    for file_name in sorted(os.listdir(input_path)):
        path = os.path.join(input_path, file_name)
        if not os.path.isfile(path):
            continue
        try:
            entries.extend(load_structures(input_path=path))
        except InputError as e:
            _log.error('%s: %s', file_name, e)
            bench_logger_errors.append({'name': file_name, 'error': str(e)})
    return entries


@pbound_ex.command
def bench(_run, _log, input_path, output_format, output_path, jobs):
    """
    Bounds every structure of every file in a directory. Files that fail to
    parse are logged and skipped. Rows keep input order whatever the worker
    count; the cache is shared by all structures.
    """
    validate_config()
    errors = []
    entries = _bench_inputs(input_path, _log, errors)
    model = make_model()
    params_hash = make_params_hash(model)
    bounder = make_bounder(model, params_hash)
    cfg = make_decomp_config()
    cache = make_cache()
    bench_logger = BenchLogger('bench', _run, len(entries), output_path)
    bench_logger.errors.extend(errors)

    def run_one(entry):
        name, y = entry
        t_start = time.time()
        try:
            record, result = structure_pbound(y, cfg, cache, bounder, params_hash, key=name)
        except PBoundError as e:
            return name, y, e, None, time.time() - t_start
        return name, y, record, result, time.time() - t_start

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            outcomes = executor.map(run_one, entries)
            for name, y, record, result, seconds in outcomes:
                _record(bench_logger, name, y, record, result, seconds)
    else:
        for entry in entries:
            _record(bench_logger, *run_one(entry))

    bench_logger.experiment_end(output_format)
    sys.stdout.write(bench_logger.render(output_format))
    sys.stdout.flush()
    return 0


def _record(bench_logger, name, y, record, result, seconds):
    if result is None:
        bench_logger.record_error(name, record)
        return
    bench_logger.record_structure(name, y.length, record, [r for _, r in result.motifs], seconds,
                                  result.bound_calls, result.cache_hits)


@pbound_ex.command
def count(_log, output_path):
    """Prints the number of decompositions the candidate limits allow."""
    validate_config()
    structures = load_structures()
    cfg = make_decomp_config()
    lines = []
    for name, y in structures:
        tree = build_loop_tree(y)
        n = count_decompositions(tree, tree.root, cfg)
        _log.info('%s: %d loops, %d decompositions', name, len(tree), n)
        lines.append(str(n) if len(structures) == 1 else '{}\t{}'.format(name, n))
    _write('\n'.join(lines) + '\n', output_path)
    return 0


@pbound_ex.command
def cache(_log, cache_path, cache_action):
    """Inspects or compacts the bound cache."""
    if cache_path is None:
        raise ConfigError("no cache file given (--cache or PBOUND_CACHE)")
    if cache_action not in ('inspect', 'compact'):
        raise ConfigError("unknown cache action {!r}".format(cache_action))
    store = make_cache()
    if cache_action == 'compact':
        store.compact()
        _log.info('compacted %s to %d entries', cache_path, len(store))
    _write(dumps(store.inspect()) + '\n')
    return 0


@pbound_ex.command
def oracle(_log, oracle_scale, seed):
    """Runs the brute-force property checks; exit code 3 when any fails."""
    validate_config()
    model = make_model()
    results = run_oracle(model, scale=oracle_scale, seed=seed)
    _write(''.join('{} {}: {}\n'.format('PASS' if r.passed else 'FAIL', r.name, r.detail) for r in results))
    return 0 if all(r.passed for r in results) else 3


# kebab-case flag -> (config key, argparse options)
FLAGS = (
    ('--params', 'params_path', dict(metavar='FILE')),
    ('--cache', 'cache_path', dict(metavar='FILE')),
    ('--max-depth', 'max_depth', dict(type=int)),
    ('--max-width', 'max_width', dict(type=int)),
    ('--max-loops', 'max_loops', dict(type=int)),
    ('--exact-len', 'exact_len', dict(
        type=int, help='longest motif bounded exhaustively (default 14); motifs within it still go to the '
                       'approximation when their design space exceeds --exact-max-sequences')),
    ('--exact-max-sequences', 'exact_max_sequences', dict(
        type=int, help='largest design space bounded exhaustively (default 5000)')),
    ('--samples', 'samples', dict(type=int)),
    ('--seed', 'seed', dict(type=int)),
    ('--retries', 'retries', dict(type=int)),
    ('--max-assignments', 'max_assignments', dict(type=int)),
    ('--rt', 'rt', dict(type=float)),
    ('--min-hairpin', 'min_hairpin', dict(type=int)),
    ('--max-interior', 'max_interior', dict(type=int)),
    ('--format', 'output_format', dict()),
    ('--output', 'output_path', dict(metavar='FILE')),
    ('--jobs', 'jobs', dict(type=int)),
    ('--mode', 'mode', dict()),
    ('--oracle-scale', 'oracle_scale', dict(type=float)),
)
SWITCHES = (
    ('--explain', 'explain'),
    ('--no-lonely-pairs', 'no_lonely_pairs'),
    ('--eval-leaf-hairpins', 'eval_leaf_hairpins'),
    ('--log-space', 'log_space'),
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for flag, key, options in FLAGS:
        common.add_argument(flag, dest=key, default=None, **options)
    for flag, key in SWITCHES:
        common.add_argument(flag, dest=key, action='store_true', default=None)
    common.add_argument('--observe', metavar='DIR', default=None, help='attach a sacred FileStorageObserver')
    common.add_argument('-v', '--verbose', action='count', default=0)

    parser = argparse.ArgumentParser(prog='run_pbound', description='Probabilistic designability bounds '
                                                                    'for RNA secondary structures.')
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('analyze', parents=[common], help='bound the structures of one file').add_argument(
        'input_path', metavar='PATH')
    commands.add_parser('bench', parents=[common], help='bound every structure in a directory').add_argument(
        'input_path', metavar='DIR')
    commands.add_parser('count', parents=[common], help='count decompositions').add_argument(
        'input_path', metavar='PATH')
    commands.add_parser('cache', parents=[common], help='inspect or compact the bound cache').add_argument(
        'cache_action', choices=('inspect', 'compact'))
    commands.add_parser('oracle', parents=[common], help='run the brute-force property checks')
    return parser


def config_updates_from(args: argparse.Namespace) -> dict:
    updates = {}
    keys = [key for _, key, _ in FLAGS] + [key for _, key in SWITCHES] + ['input_path', 'cache_action']
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    return updates


def setup_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(levelname)s - %(name)s - %(message)s'))
    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(level)
    return root


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    root = setup_logging(args.verbose)
    pbound_ex.logger = root
    if args.observe is not None:
        pbound_ex.observers.append(FileStorageObserver(args.observe))
    try:
        run = pbound_ex.run(args.command, config_updates=config_updates_from(args))
    except PBoundError as e:
        logger.error('%s', e)
        return e.exit_code
    except SacredError as e:
        logger.error('configuration error: %s', e)
        return ConfigError.exit_code
    except Exception:
        logger.exception('internal error')
        return PBoundError.exit_code
    return int(run.result or 0)


if __name__ == '__main__':
    sys.exit(main())
