"""``formantrack`` command line: synthesize, track, analyze and compare.

Every command writes CSV (or JSON for tracks ending in ``.json``) to
``--output`` (stdout when ``-``) and, for file outputs, a
``<output>.manifest.json`` sidecar with everything needed to rerun it.
Option values may also come from ``--config file.json`` (keys are the long
option names with dashes replaced by underscores); command-line flags win.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import logging
import math
import os
import re
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .adaptive import (DivergenceError, LmsConfig, RlsConfig, errors_of, iterations_to_converge,
                       run_predictor)
from .analysis import (autocorr_matrix_2tap, complexity_report, eigenvalue_spread, error_surface,
                       sym_eigenvalues, toeplitz_from_autocorr, wiener_solution)
from .formants import TYPICAL_FORMANT_RANGES, RootFindingError, track_formants
from .lpc import DegenerateAutocorrelationError, FrameConfig, autocorrelation, make_window
from .signal_io import (Signal, SynthVowelSpec, UnsupportedEncodingError, WavFormatError,
                        gen_sinusoid, gen_vowel, read_wav, remove_dc, write_wav)
from .spectrum import SpectrogramConfig, stft_spectrogram

log = logging.getLogger("formantrack")

# best-performing settings; per-command tables below override
DEFAULTS = {
    "order": 8,
    "nformants": 3,
    "alpha": 0.2,
    "lam": 0.99,
    "decimate": 64,
    "window_ms": 20.0,
    "hop_ms": 10.0,
    "min_freq": 5.0,
    "output": "-",
}


COMMAND_DEFAULTS = {
    "synth": {"pitch": 100.0, "formants": [(500.0, 60.0), (1500.0, 90.0), (2500.0, 120.0)],
              "duration": 1.0, "amplitude": 10000.0, "rate": 8000.0},
    "surface": {"omega": math.pi / 9, "power": 1.0, "w0_range": (-1.0, 4.0), "w1_range": (-3.0, 2.0),
                "step": 0.05},
    "spectrogram": {"preset": "broadband"},
    "complexity": {"samples": 8000},
    "converge": {"omega": math.pi / 9, "alpha": 0.5, "lam": 0.8, "samples": 1000, "threshold": 1e-2,
                 "hold": 50},
}


class UsageError(Exception):
    pass


_ANGLE = re.compile(r"^\s*([+-]?\s*(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(text: str) -> float:
    """``"pi/9"``, ``"2pi/9"``, ``"2*pi/3"``, ``"-pi"`` or a plain number, in radians."""
    m = _ANGLE.match(text.lower())
    if m:
        coef = m.group(1).replace(" ", "")
        num = float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0)
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pair(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return vals[0], vals[1]


def _formant_list(text: str) -> list[tuple[float, float]]:
    """``"500:60,1500:90"`` -> ``[(500, 60), (1500, 90)]``."""
    out = []
    for item in text.split(","):
        try:
            f, bw = item.split(":")
            out.append((float(f), float(bw)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"formant {item!r} is not FREQ:BW") from None
    return out


# ---------------------------------------------------------------------------
# output plumbing


@contextlib.contextmanager
def atomic_text(path: str):
    if path == "-":
        yield sys.stdout
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            yield fh
        os.replace(tmp, target)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _sha256(path) -> str | None:
    if path is None:
        return None
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(command: str, params: dict, outputs: list[str], input_path=None, extra=None):
    outputs = [o for o in outputs if o != "-"]
    if not outputs:
        return None
    manifest = {
        "command": command,
        "parameters": params,
        "input_path": str(input_path) if input_path else None,
        "input_sha256": _sha256(input_path),
        "outputs": outputs,
        "tool_version": __version__,
    }
    if extra:
        manifest["results"] = extra
    path = outputs[0] + ".manifest.json"
    with atomic_text(path) as fh:
        json.dump(manifest, fh, indent=2, default=_jsonable)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _load_signal(path) -> Signal:
    return read_wav(path)


# ---------------------------------------------------------------------------
# commands


def cmd_synth(p: dict) -> dict:
    rate = p["rate"]
    if p.get("tone") is not None:
        omega = 2 * math.pi * p["tone"] / rate
        sig = gen_sinusoid(p["amplitude"], omega, int(round(p["duration"] * rate)), 0.0, rate)
    else:
        spec = SynthVowelSpec(p["pitch"], p["formants"], p["duration"], p["amplitude"], p.get("formants_end"))
        sig = gen_vowel(spec, rate)
    out = p["output"]
    if out == "-":
        raise UsageError("synth needs a file --output")
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    os.close(fd)
    try:
        write_wav(sig, tmp)
        os.replace(tmp, target)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise
    return {"n_samples": len(sig)}


def _track_config(p: dict, explicit: set):
    method = p["method"]
    conflicts = {"lms": {"lam", "delta", "window_ms", "hop_ms"},
                 "rls": {"alpha", "window_ms", "hop_ms"},
                 "lpc": {"alpha", "lam", "delta", "decimate"}}[method]
    bad = sorted(conflicts & explicit)
    if bad:
        flags = ", ".join("--" + ("lambda" if b == "lam" else b.replace("_", "-")) for b in bad)
        raise UsageError(f"{flags} not valid with --method {method}")
    if method == "lms":
        return LmsConfig(p["alpha"])
    if method == "rls":
        return RlsConfig(p["lam"], p.get("delta"))
    return None  # lpc frame config needs the sample rate


def cmd_track(p: dict, explicit: set) -> dict:
    cfg = _track_config(p, explicit)
    sig = _load_signal(p["input"])
    if p.get("normalize"):
        peak = np.abs(sig.samples).max()
        if peak > 0:
            sig = sig.scaled(1.0 / peak)
    if cfg is None:
        cfg = FrameConfig.from_ms(sig.sample_rate_hz, p["window_ms"], p["hop_ms"])
    ranges = TYPICAL_FORMANT_RANGES if p.get("range_filter") else None
    track = track_formants(sig, cfg, p["order"], p["nformants"], p["decimate"], p["min_freq"], ranges)
    with atomic_text(p["output"]) as fh:
        if p["output"].endswith(".json"):
            fh.write(track.to_json())
            fh.write("\n")
        else:
            track.write_csv(fh)
    present = ~np.isnan(track.freqs_hz)
    return {"n_entries": len(track), "present_fraction": present.mean(axis=0).tolist()}


def cmd_analyze(p: dict, explicit: set) -> dict:
    if (p.get("input") is None) == (p.get("r") is None):
        raise UsageError("give exactly one of --input or --r")
    if p.get("r") is not None:
        r = np.asarray(p["r"], dtype=np.float64)
        if p.get("lags") is not None:
            if p["lags"] >= r.size:
                raise UsageError(f"--lags {p['lags']} needs {p['lags'] + 1} values in --r")
            r = r[:p["lags"] + 1]
    else:
        sig = remove_dc(_load_signal(p["input"]))
        lags = p["lags"] if p.get("lags") is not None else 10
        if lags >= len(sig):
            raise UsageError(f"--lags {lags} must be below the signal length {len(sig)}")
        r = autocorrelation(sig.samples, lags, normalize=True)
    v = sym_eigenvalues(toeplitz_from_autocorr(r))
    spread = eigenvalue_spread(v) if v.min() > 0 else math.inf
    with atomic_text(p["output"]) as fh:
        fh.write("i,r,eigenvalue\n")
        for i, (ri, vi) in enumerate(zip(r, v)):
            fh.write(f"{i},{float(ri)!r},{float(vi)!r}\n")
    print(f"eigenvalue spread: {spread:.6g}", file=sys.stderr)
    return {"eigenvalue_spread": spread, "eigenvalues": v.tolist()}


def cmd_surface(p: dict, explicit: set) -> dict:
    R, pv = autocorr_matrix_2tap(p["omega"], p["power"])
    surf = error_surface(p["power"], pv, R, p["w0_range"], p["w1_range"], p["step"])
    w_opt = wiener_solution(R, pv)
    with atomic_text(p["output"]) as fh:
        surf.write_csv(fh)
    print(f"Wiener solution: [{w_opt[0]:.4f}, {w_opt[1]:.4f}]; grid minimum at {surf.argmin()}",
          file=sys.stderr)
    return {"wiener_solution": w_opt.tolist(), "grid_argmin": list(surf.argmin()),
            "eigenvalues": sym_eigenvalues(R).tolist()}


def cmd_spectrogram(p: dict, explicit: set) -> dict:
    sig = remove_dc(_load_signal(p["input"]))
    if p.get("window_len") is not None:
        L = p["window_len"]
        overlap = p["overlap"] if p.get("overlap") is not None else round(3 / 4 * L)
        cfg = SpectrogramConfig.with_overlap(p.get("nfft") or 1024, make_window("blackman", L), overlap)
    else:
        cfg = SpectrogramConfig.preset(p["preset"])
        if p.get("nfft") is not None or p.get("overlap") is not None:
            L = len(cfg.window)
            overlap = p["overlap"] if p.get("overlap") is not None else L - cfg.hop
            cfg = SpectrogramConfig.with_overlap(p.get("nfft") or cfg.nfft, cfg.window, overlap)
    spec = stft_spectrogram(sig, cfg)
    with atomic_text(p["output"]) as fh:
        spec.write_csv(fh, db=bool(p.get("db")))
    return {"n_bins": spec.magnitudes.shape[0], "n_frames": spec.magnitudes.shape[1],
            "hop": cfg.hop, "window_len": len(cfg.window), "nfft": cfg.nfft}


def cmd_complexity(p: dict, explicit: set) -> dict:
    sig = _load_signal(p["input"]) if p.get("input") else None
    rep = complexity_report(p["order"], p["samples"], sig, p["alpha"], p["lam"])
    with atomic_text(p["output"]) as fh:
        rep.write_csv(fh)
    print(rep.format_table(), file=sys.stderr)
    return {"ratios": rep.ratios(), "per_sample": rep.per_sample()}


def cmd_converge(p: dict, explicit: set) -> dict:
    amp = p["amplitude"] if p.get("amplitude") is not None else math.sqrt(2.0)
    sig = gen_sinusoid(amp, p["omega"], p["samples"])
    e_lms = errors_of(run_predictor(sig, LmsConfig(p["alpha"]), 2, decimate=p["samples"]))
    e_rls = errors_of(run_predictor(sig, RlsConfig(p["lam"], p.get("delta")), 2, decimate=p["samples"]))
    with atomic_text(p["output"]) as fh:
        fh.write("n,lms_abs_error,rls_abs_error\n")
        for i, (a, b) in enumerate(zip(e_lms, e_rls)):
            fh.write(f"{i + 2},{abs(a)!r},{abs(b)!r}\n")
    it_lms = iterations_to_converge(e_lms, p["threshold"], p["hold"])
    it_rls = iterations_to_converge(e_rls, p["threshold"], p["hold"])
    print(f"iterations to |e| < {p['threshold']:g} (held {p['hold']}): LMS {it_lms}, RLS {it_rls}",
          file=sys.stderr)
    return {"lms_iterations": it_lms, "rls_iterations": it_rls}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="formantrack", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, output_required=False):
        sp.add_argument("--config", help="JSON file of option defaults")
        sp.add_argument("-o", "--output", required=output_required,
                        help="output path ('-' for stdout, the default)")

    s = sub.add_parser("synth", help="write a synthetic vowel or tone as PCM16 WAV")
    common(s, output_required=True)
    s.add_argument("--pitch", type=float, help="f0 in Hz (default 100)")
    s.add_argument("--formants", type=_formant_list, help="FREQ:BW list, e.g. 500:60,1500:90,2500:120")
    s.add_argument("--formants-end", type=_formant_list,
                   help="end-point formants for a linear glide")
    s.add_argument("--tone", type=float, help="write a pure tone of this frequency instead")
    s.add_argument("--duration", type=float, help="seconds (default 1)")
    s.add_argument("--amplitude", type=float, help="output peak (int16 scale)")
    s.add_argument("--rate", type=float, help="sample rate in Hz (default 8000)")

    t = sub.add_parser("track", help="formant track from a WAV file")
    common(t)
    t.add_argument("-i", "--input", required=True)
    t.add_argument("--method", choices=["lms", "rls", "lpc"], required=True)
    t.add_argument("--order", type=int, help="predictor order P (default 8)")
    t.add_argument("--nformants", type=int, help="formants per entry (default 3)")
    t.add_argument("--alpha", type=float, help="LMS step size (default 0.2)")
    t.add_argument("--lambda", dest="lam", type=float, help="RLS forgetting factor (default 0.99)")
    t.add_argument("--delta", type=float, help="RLS init: inverse correlation = I/delta")
    t.add_argument("--decimate", type=int, help="adaptive snapshot spacing (default 64)")
    t.add_argument("--window-ms", type=float, help="LPC window (default 20 ms)")
    t.add_argument("--hop-ms", type=float, help="LPC hop (default 10 ms)")
    t.add_argument("--min-freq", type=float, help="lowest formant frequency (default 5 Hz)")
    t.add_argument("--range-filter", action="store_true",
                   help="blank formants outside typical F1-F3 ranges")
    t.add_argument("--normalize", action="store_true",
                   help="scale input to unit peak first (LMS step sizes assume unit scale)")

    a = sub.add_parser("analyze", help="autocorrelation, Toeplitz eigenvalues and spread")
    common(a)
    a.add_argument("-i", "--input")
    a.add_argument("--r", type=_float_list, help="autocorrelation values r(0),r(1),...")
    a.add_argument("--lags", type=int)

    su = sub.add_parser("surface", help="two-tap MSE surface of a sinusoid predictor")
    common(su)
    su.add_argument("--omega", type=parse_angle, help="radians/sample, e.g. pi/9")
    su.add_argument("--power", type=float, help="sinusoid power (default 1)")
    su.add_argument("--w0-range", type=_pair)
    su.add_argument("--w1-range", type=_pair)
    su.add_argument("--step", type=float, help="grid spacing (default 0.05)")

    sp = sub.add_parser("spectrogram", help="STFT magnitude spectrogram")
    common(sp)
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("--preset", choices=["broadband", "narrowband"], help="default broadband")
    sp.add_argument("--nfft", type=int)
    sp.add_argument("--window-len", type=int, help="Blackman window length")
    sp.add_argument("--overlap", type=int, help="samples of overlap (default 3/4 window)")
    sp.add_argument("--db", action="store_true", help="emit dB (floor -120)")

    c = sub.add_parser("complexity", help="operation counts of LMS, LPC and RLS")
    common(c)
    c.add_argument("-i", "--input", help="WAV (default: synthetic vowel)")
    c.add_argument("--order", type=int)
    c.add_argument("--samples", type=int, help="synthetic signal length (default 8000)")
    c.add_argument("--alpha", type=float)
    c.add_argument("--lambda", dest="lam", type=float)

    cv = sub.add_parser("converge", help="LMS vs RLS error on a noiseless sinusoid, two taps")
    common(cv)
    cv.add_argument("--omega", type=parse_angle)
    cv.add_argument("--amplitude", type=float, help="default sqrt(2) (unit power)")
    cv.add_argument("--alpha", type=float)
    cv.add_argument("--lambda", dest="lam", type=float)
    cv.add_argument("--delta", type=float)
    cv.add_argument("--samples", type=int)
    cv.add_argument("--threshold", type=float)
    cv.add_argument("--hold", type=int)
    return ap


COMMANDS = {
    "synth": lambda p, explicit: cmd_synth(p),
    "track": cmd_track,
    "analyze": cmd_analyze,
    "surface": cmd_surface,
    "spectrogram": cmd_spectrogram,
    "complexity": cmd_complexity,
    "converge": cmd_converge,
}


def resolve_params(args: argparse.Namespace) -> tuple[dict, set]:
    """Merge defaults < config file < flags. Returns params and explicitly set keys."""
    given = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config", "verbose")}
    config = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
        if "lambda" in config:
            config["lam"] = config.pop("lambda")
    explicit = (set(config) | set(given)) - {"output", "input"}
    params = dict(DEFAULTS)
    params.update(COMMAND_DEFAULTS.get(args.command, {}))
    params.update(config)
    params.update(given)
    for k in vars(args):
        params.setdefault(k, None)
    return params, explicit


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        params, explicit = resolve_params(args)
        results = COMMANDS[args.command](params, explicit)
    except UsageError as exc:
        parser.error(str(exc))
    except (DivergenceError, DegenerateAutocorrelationError, RootFindingError) as exc:
        print(f"formantrack {args.command}: aborted: {exc}", file=sys.stderr)
        return 1
    except (WavFormatError, UnsupportedEncodingError, OSError, ValueError) as exc:
        print(f"formantrack {args.command}: error: {exc}", file=sys.stderr)
        return 1
    for k in ("config", "command", "verbose"):
        params.pop(k, None)
    write_manifest(args.command, params, [params["output"]], params.get("input"), results)
    return 0


if __name__ == "__main__":
    sys.exit(main())
