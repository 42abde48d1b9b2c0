import json

import pandas as pd
import pytest

from rnapbound.common.logger import REPORT_COLUMNS, TIMING_COLUMNS, BenchLogger
from rnapbound.common.record import Method, PBoundRecord
from rnapbound.common.util import FakeRun, convert, format_prob


def _decomposed(name, pbound, count):
    return PBoundRecord(key=name, pbound=pbound, method=Method.DECOMPOSED, params_hash='abc',
                        count_explored=count)


def _motifs():
    return [PBoundRecord(key='a', pbound=0.5, method=Method.EXACT, params_hash='abc'),
            PBoundRecord(key='b', pbound=0.5, method=Method.APPROX, params_hash='abc', umfe_undesignable=True),
            PBoundRecord.skipped('c', 'abc')]


@pytest.fixture
def bench_logger():
    run = FakeRun()
    bench_logger = BenchLogger('bench', run, 2)
    bench_logger.record_structure('first', 7, _decomposed('first', 0.25, 4), _motifs(), 0.5, 3, 1)
    bench_logger.record_structure('second', 5, _decomposed('second', 0.75, 2), _motifs()[:1], 0.1, 1, 0)
    return bench_logger


def test_rows_and_scalars(bench_logger):
    frame = bench_logger.report_frame()
    assert list(frame.columns) == REPORT_COLUMNS
    assert frame['n_exact'].tolist() == [1, 1]
    assert frame['n_approx'].tolist() == [1, 0]
    assert frame['n_skipped'].tolist() == [1, 0]
    assert bench_logger.mean_pbound() == pytest.approx(0.5)
    assert bench_logger._run.counter == 4
    assert ('bench.pbound', 0.75, 1) in bench_logger._run.scalars


def test_csv_report_has_no_timings(bench_logger):
    text = bench_logger.render('csv')
    assert text.splitlines()[0] == ','.join(REPORT_COLUMNS)
    assert 'seconds' not in text
    assert text.splitlines()[1].startswith('first,7,0.25,')
    assert text.splitlines()[-1] == 'mean,,0.5,,,,,'


def test_json_report(bench_logger):
    bench_logger.record_error('broken', ValueError('unbalanced bracket at position 3'))
    data = json.loads(bench_logger.render('json'))
    assert data['schema_version'] == 1
    assert [row['name'] for row in data['structures']] == ['first', 'second']
    assert data['errors'][0]['name'] == 'broken'
    assert data['summary'] == {'structures': 2, 'mean_pbound': 0.5}


def test_text_report(bench_logger):
    lines = bench_logger.render('text').splitlines()
    assert lines[0].split() == ['name', 'length', 'pbound', 'count_explored']
    assert lines[-1] == 'mean pbound: 0.5'


def test_experiment_end_writes_report_and_timings(bench_logger, tmp_path):
    bench_logger.output_path = str(tmp_path / 'out' / 'report.csv')
    bench_logger.experiment_end('csv')
    report = pd.read_csv(tmp_path / 'out' / 'report.csv')
    timings = pd.read_csv(tmp_path / 'out' / 'report.timings.csv')
    assert report['name'].tolist() == ['first', 'second', 'mean']
    assert report['pbound'].tolist() == [0.25, 0.75, 0.5]
    assert list(timings.columns) == TIMING_COLUMNS
    assert timings['bound_calls'].tolist() == [3, 1]
    assert bench_logger._run.scalars[-1][0] == 'bench.mean_pbound'
    assert bench_logger.get_sacred_results() == {'mean_pbound': 0.5, 'structures': 2, 'errors': 0}


def test_formatting_helpers():
    assert convert(3725) == '1:02:05'
    assert format_prob(1 / 3) == '0.333333'
