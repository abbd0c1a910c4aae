from transwave.conversion.gnuplot import resolvent_script, spectrum_script, trace_script


def test_spectrum_script(tmp_path, cfg):
    path = spectrum_script("spectrum.csv", tmp_path / "spectrum.gp", cfg)
    text = path.read_text()
    assert "set output 'spectrum.png'" in text
    assert "plot 'spectrum.csv'" in text
    assert "set datafile separator ','" in text


def test_scripts_start_with_output_header(tmp_path, cfg):
    settings = {"verb": "spectrum", "h": 0.02}
    text = spectrum_script("spectrum.csv", tmp_path / "spectrum.gp", cfg, settings).read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# transwave ")
    assert lines[1].startswith("# config: {")
    assert lines[2] == '# settings: {"h":0.02,"verb":"spectrum"}'
    assert lines[3] == "set datafile separator ','"
    trace = trace_script("trace.csv", tmp_path / "t.gp", cfg).read_text()
    assert trace.splitlines()[0] == lines[0]


def test_resolvent_script(tmp_path, cfg):
    text = resolvent_script("resolvent.csv", tmp_path / "r.gp", cfg, exponent=0.5).read_text()
    assert "set logscale xy" in text
    assert "envelope exponent 0.500" in text
    assert "($3 > 0 ? $2 : 1/0)" in text
    assert "envelope exponent" not in resolvent_script("resolvent.csv", tmp_path / "r2.gp", cfg).read_text()


def test_resolvent_script_with_refined_envelope(tmp_path, cfg):
    text = resolvent_script("resolvent.csv", tmp_path / "r.gp", cfg, envelope_csv="envelope.csv").read_text()
    assert "'envelope.csv' every ::1 using 1:2" in text
    assert "($4 > 0 ? $2 : 1/0)" in text
    assert ", \\\n     'envelope.csv'" in text


def test_trace_script(tmp_path, cfg):
    semilog = trace_script("trace.csv", tmp_path / "a.gp", cfg).read_text()
    loglog = trace_script("trace.csv", tmp_path / "b.gp", cfg, loglog=True).read_text()
    assert "set logscale y\n" in semilog
    assert "trace_semilog.png" in semilog
    assert "set logscale xy" in loglog
    assert "trace_loglog.png" in loglog
