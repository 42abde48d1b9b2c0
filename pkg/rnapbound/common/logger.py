import logging
import os
import time
from typing import List, Optional

import numpy as np
import pandas as pd

from rnapbound.common.record import Method, PBoundRecord
from rnapbound.common.util import convert, dumps, format_prob

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['name', 'length', 'pbound', 'n_exact', 'n_approx', 'n_skipped', 'count_explored',
                  'umfe_undesignable']
TIMING_COLUMNS = ['name', 'seconds', 'bound_calls', 'cache_hits']
SCHEMA_VERSION = 1


class BenchLogger(object):
    def __init__(self, exp_name, _run, n_structures, output_path=None):
        '''
        Initializes a logger for one batch of structures.
        Rows go to the report, wall times to a separate timing table that is
        never part of the printed report.
        '''
        self.exp_name = exp_name
        self._run = _run
        self.n_structures = n_structures
        self.output_path = output_path
        self.rows = []
        self.timings = []
        self.errors = []
        self.structure_count = 0
        self.t_start = time.time()
        self.t_last_print = time.time()
        self.structure_times = []

    def record_structure(self, name, length, record: PBoundRecord, motif_records: List[PBoundRecord],
                         seconds: float, bound_calls: int = 0, cache_hits: int = 0):
        """
        Records one bounded structure, pushes its metrics into the sacred run
        and prints a progress line.
        """
        methods = [r.method for r in motif_records]
        self.rows.append({
            'name': name,
            'length': int(length),
            'pbound': float(record.pbound),
            'n_exact': methods.count(Method.EXACT),
            'n_approx': methods.count(Method.APPROX),
            'n_skipped': methods.count(Method.SKIPPED),
            'count_explored': int(record.count_explored or 0),
            'umfe_undesignable': bool(record.umfe_undesignable),
        })
        self.timings.append({'name': name, 'seconds': seconds, 'bound_calls': bound_calls,
                             'cache_hits': cache_hits})
        self._run.log_scalar('bench.pbound', float(record.pbound), self.structure_count)
        self._run.log_scalar('bench.count_explored', float(record.count_explored or 0), self.structure_count)
        self.structure_count += 1
        self.print_metrics(name, record)

    def record_error(self, name, error):
        self.errors.append({'name': name, 'error': str(error)})
        logger.error('%s: %s', name, error)

    def print_metrics(self, name, record):
        taken_time = time.time() - self.t_last_print
        total_time = time.time() - self.t_start
        self.structure_times.append(taken_time)
        time_left = convert(max(0, self.n_structures - self.structure_count) * np.mean(self.structure_times))
        logger.info('structures: %d/%d, name: %s, pbound: %s, time: %s, total time: %s, time left: %s',
                    self.structure_count, self.n_structures, name, format_prob(record.pbound),
                    convert(taken_time), convert(total_time), time_left)
        self.t_last_print = time.time()

    def report_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=REPORT_COLUMNS)

    def timing_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.timings, columns=TIMING_COLUMNS)

    def mean_pbound(self) -> float:
        if not self.rows:
            return float('nan')
        return float(np.mean([row['pbound'] for row in self.rows]))

    def render(self, output_format='csv') -> str:
        """The report as printed on stdout; contains no timing fields."""
        if output_format == 'json':
            return dumps({'schema_version': SCHEMA_VERSION,
                          'structures': self.rows,
                          'errors': self.errors,
                          'summary': {'structures': len(self.rows), 'mean_pbound': self.mean_pbound()}})
        if output_format == 'csv':
            # summary row: name 'mean', every column but pbound left empty
            summary = pd.DataFrame([{'name': 'mean', 'pbound': self.mean_pbound()}], columns=REPORT_COLUMNS)
            return (self.report_frame().to_csv(index=False, float_format='%.10g', lineterminator='\n')
                    + summary.to_csv(index=False, header=False, float_format='%.10g', lineterminator='\n'))
        lines = ['{:<24} {:>6} {:>12} {:>16}'.format('name', 'length', 'pbound', 'count_explored')]
        for row in self.rows:
            lines.append('{:<24} {:>6} {:>12} {:>16}'.format(row['name'], row['length'],
                                                            format_prob(row['pbound']), row['count_explored']))
        lines.append('mean pbound: {}'.format(format_prob(self.mean_pbound())))
        return '\n'.join(lines) + '\n'

    def experiment_end(self, output_format='csv'):
        if self.output_path is not None:
            directory = os.path.dirname(os.path.abspath(self.output_path))
            os.makedirs(directory, exist_ok=True)
            with open(self.output_path, 'w', encoding='utf-8') as fp:
                fp.write(self.render(output_format))
            stem, _ = os.path.splitext(self.output_path)
            self.timing_frame().to_csv(stem + '.timings.csv', index=False)
        if self.rows:
            self._run.log_scalar('bench.mean_pbound', self.mean_pbound())
        logger.info('...Finished total of %d structures (%d errors) in %s, mean pbound %s.',
                    len(self.rows), len(self.errors), convert(time.time() - self.t_start),
                    format_prob(self.mean_pbound()))

    def get_sacred_results(self):
        return {'mean_pbound': self.mean_pbound(), 'structures': len(self.rows), 'errors': len(self.errors)}
