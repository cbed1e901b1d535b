import json

import pytest

from src.cli import build_parser, main
from src.persistence import load_document, load_profile, save_profile


def run(*argv):
    return main([str(a) for a in argv])


def test_analytic_default_writes_limit_solution(tmp_path):
    out = tmp_path / 'b1.json'
    assert run('analytic', '--h', 0.01, '--output', out) == 0
    profile = load_profile(str(out))
    assert profile.metadata['generator'] == 'analytic-b1'
    assert profile.first(0.5)[0] == pytest.approx(2 * 2 ** 0.5)


def test_analytic_zero_C1_gives_rigid_swirl(tmp_path):
    out = tmp_path / 'trivial.json'
    assert run('analytic', '--C1', 0, '--b', 1.5, '--h', 0.01, '--output', out) == 0
    document = load_document(str(out))
    assert document['generator'] == 'trivial'
    assert document['b'] == 1.5
    assert set(document['F']) == {0.0}


def test_analytic_rejects_invalid_input(tmp_path):
    out = tmp_path / 'never.json'
    assert run('analytic', '--C-omega', 0, '--output', out) == 2
    assert run('analytic', '--C1', 1, '--b', 0.5, '--output', out) == 2
    assert not out.exists()


def test_analytic_runs_are_reproducible(tmp_path):
    first, second = tmp_path / 'a.json', tmp_path / 'b.json'
    run('analytic', '--h', 0.01, '--output', first)
    run('analytic', '--h', 0.01, '--output', second)
    assert first.read_bytes() == second.read_bytes()


def test_solve_inviscid_rejects_b_outside_range(tmp_path):
    assert run('solve-inviscid', '--b', 1.2, '--output', tmp_path / 'x.json') == 2


def test_verify_closed_form(tmp_path):
    out = tmp_path / 'b1.json'
    run('analytic', '--output', out)
    assert run('verify', out, '--output-dir', tmp_path / 'report') == 0
    summary = json.loads((tmp_path / 'report' / 'summary.json').read_text(encoding='utf-8'))
    assert summary['mode'] == 'inviscid-reduced'
    assert summary['stability']['verdict'] == 'Stable'
    assert (tmp_path / 'report' / 'residuals.csv').exists()


def test_verify_rejects_perturbed_solution(tmp_path):
    out = tmp_path / 'b1.json'
    run('analytic', '--output', out)
    document = json.loads(out.read_text(encoding='utf-8'))
    document['F'] = [None if v is None else 1.1 * v for v in document['F']]
    document['Omega'] = [v + 0.1 * x for v, x in zip(document['Omega'], document['x'])]
    out.write_text(json.dumps(document), encoding='utf-8')
    assert run('verify', out) == 4


def test_verify_reports_instability_without_failing(tmp_path, caplog):
    out = tmp_path / 'trivial.json'
    run('analytic', '--C1', 0, '--b', 1.5, '--output', out)
    assert run('verify', out) == 0
    assert 'Rayleigh criterion violated' in caplog.text


def test_verify_missing_file(tmp_path):
    assert run('verify', tmp_path / 'missing.json') == 5


def test_layer_scaling_needs_four_viscosities(tmp_path):
    assert run('layer-scaling', '--nu-list', '0.01,0.005,0.001', '--output', tmp_path / 'l.csv') == 2


def test_fields_from_analytic_solution(tmp_path):
    out = tmp_path / 'b1.json'
    run('analytic', '--h', 0.01, '--output', out)
    grid = tmp_path / 'speed.csv'
    line = tmp_path / 'line.csv'
    fit = tmp_path / 'powerlaw.json'
    assert run('fields', out, '--quantity', 'speed', '--grid-output', grid,
               '--streamline', '0.5,0,0.5', '--max-steps', 50, '--streamline-output', line,
               '--powerlaw', '--powerlaw-output', fit) == 0
    assert grid.read_text(encoding='utf-8').splitlines()[0] == 'r,z,value'
    assert len(line.read_text(encoding='utf-8').splitlines()) >= 2
    assert json.loads(fit.read_text(encoding='utf-8'))['exponent'] == pytest.approx(-1.0, abs=0.02)


def test_powerlaw_fit_of_solved_field(inviscid_solution, tmp_path, capsys):
    profile, _, mesh = inviscid_solution
    path = tmp_path / 'b06.json'
    save_profile(profile, str(path), mesh)
    fit = tmp_path / 'powerlaw.json'
    assert run('fields', path, '--powerlaw', '--powerlaw-output', fit) == 0
    result = json.loads(fit.read_text(encoding='utf-8'))
    assert result['b'] == 0.6
    assert result['exponent'] == pytest.approx(-0.6, abs=0.05)
    assert result['z0'] == 1.0
    assert result['r_window'] == pytest.approx([0.01, 0.1])
    assert result['n_samples'] == 20
    assert 'power-law exponent' in capsys.readouterr().out


def test_fields_rejects_bad_start(tmp_path):
    out = tmp_path / 'b1.json'
    run('analytic', '--h', 0.01, '--output', out)
    assert run('fields', out, '--streamline', '0.5,0') == 2


def test_config_errors_map_to_exit_codes(tmp_path):
    config = tmp_path / 'config.json'
    config.write_text('{"newton": {"speed": 1}}', encoding='utf-8')
    assert run('--config', config, 'analytic', '--output', tmp_path / 'x.json') == 2
    assert run('--config', tmp_path / 'absent.json', 'analytic', '--output', tmp_path / 'x.json') == 5


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


@pytest.mark.slow
def test_solve_then_verify(tmp_path):
    out = tmp_path / 'b06.json'
    report = tmp_path / 'newton.json'
    assert run('solve-inviscid', '--b', 0.6, '--c', 0.25, '--output', out, '--report', report) == 0
    assert json.loads(report.read_text(encoding='utf-8'))['b'] == 0.6
    assert run('verify', out) == 0
