import csv
import json
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from harmonic.models import InvariantSuiteRecord

SMALL_CONFIG = {
    'kind': 'hardy_equiv', 'seed': 11, 'd': 1, 'N': 16, 'n': 2, 'band_m': 4,
    'corpus_size': 3, 'scales': 48, 'p_list': [2, 'inf'],
}


def opharm(*args):
    out = StringIO()
    call_command('opharm', *[str(a) for a in args], stdout=out)
    return out.getvalue()


@pytest.fixture
def config_file(tmp_path):
    def write(content):
        path = tmp_path / 'config.json'
        path.write_text(content if isinstance(content, str) else json.dumps(content),
                        encoding='utf-8')
        return path
    return write


class TestRun:

    def test_writes_csv_report(self, tmp_path, config_file):
        out_dir = tmp_path / 'reports'
        output = opharm('run', '--config', config_file(SMALL_CONFIG), '--out', out_dir)

        report = out_dir / 'hardy_equiv_seed11.csv'
        assert report.exists()
        assert str(report) in output
        with report.open(newline='', encoding='utf-8') as handle:
            rows = list(csv.DictReader(handle))
        assert rows
        assert {row['p'] for row in rows} == {'2.0', 'inf'}

    def test_flags_override_config(self, tmp_path, config_file):
        opharm('run', '--config', config_file(SMALL_CONFIG), '--seed', 5,
               '--format', 'json', '--out', tmp_path)

        report = json.loads((tmp_path / 'hardy_equiv_seed5.json').read_text(encoding='utf-8'))
        assert report['config']['seed'] == 5

    def test_broken_json(self, config_file):
        with pytest.raises(CommandError) as excinfo:
            opharm('run', '--config', config_file('{"kind": '))
        assert excinfo.value.returncode == 2

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(CommandError) as excinfo:
            opharm('run', '--config', tmp_path / 'absent.json')
        assert excinfo.value.returncode == 2

    @pytest.mark.parametrize('content', [
        [1, 2, 3],
        {**SMALL_CONFIG, 'band_m': 8},
        {**SMALL_CONFIG, 'N': 12},
        {**SMALL_CONFIG, 'kind': 'spectral'},
    ])
    def test_invalid_configuration(self, config_file, content):
        with pytest.raises(CommandError) as excinfo:
            opharm('run', '--config', config_file(content))
        assert excinfo.value.returncode == 2

    def test_unwritable_output(self, tmp_path, config_file):
        blocker = tmp_path / 'blocker'
        blocker.write_text('', encoding='utf-8')
        with pytest.raises(CommandError) as excinfo:
            opharm('run', '--config', config_file(SMALL_CONFIG), '--out', blocker / 'sub')
        assert excinfo.value.returncode == 2


@pytest.mark.django_db
class TestCheck:

    def test_single_check_passes(self, tmp_path):
        out_file = tmp_path / 'suite.json'
        output = opharm('check', '--only', 'fft_plancherel', '--seed', 3, '--record',
                        '--out', out_file)

        assert 'PASS fft_plancherel' in output
        suite = json.loads(out_file.read_text(encoding='utf-8'))
        assert suite['passed'] is True
        assert suite['seed'] == 3
        assert InvariantSuiteRecord.objects.get().passed

    def test_failing_check_exits_with_one(self, monkeypatch):
        from harmonic import invariants

        def broken(seed):
            return invariants.CheckResult('', False, {'seed': seed}, detail="mismatch")

        monkeypatch.setitem(invariants.CHECKS, 'fft_plancherel', broken)
        with pytest.raises(CommandError) as excinfo:
            opharm('check', '--only', 'fft_plancherel')
        assert excinfo.value.returncode == 1
        assert 'fft_plancherel' in str(excinfo.value)


class TestCompanion:

    def test_prints_pair_json(self):
        export = json.loads(opharm('companion', '--phi', 'd_poisson', '--mode', 'discrete',
                                   '--N', 16))
        assert export['phi_kind'] == 'd_poisson'
        assert export['mode'] == 'discrete'
        assert len(export['psi_values']) == len(export['xi_grid'])

    def test_writes_file(self, tmp_path):
        target = tmp_path / 'pair.json'
        opharm('companion', '--phi', 'riesz_poisson', '--alpha', 2, '--mode', 'discrete',
               '--N', 16, '--out', target)
        assert json.loads(target.read_text(encoding='utf-8'))['phi_kind'] == 'riesz_poisson'

    def test_unknown_symbol(self):
        with pytest.raises(CommandError) as excinfo:
            opharm('companion', '--phi', 'heat')
        assert excinfo.value.returncode == 2
