"""Speech formant tracking with LMS, RLS and Levinson-Durbin LPC predictors."""

__version__ = "0.1.0"

from .adaptive import (DivergenceError, LmsConfig, LmsState, PredictionRecord, RlsConfig, RlsState,
                       iterations_to_converge, lms_step, rls_step, run_predictor, weighted_sse,
                       weights_to_poly)
from .analysis import (autocorr_matrix_2tap, complexity_report, error_surface, sym_eigenvalues,
                       toeplitz_from_autocorr, wiener_solution)
from .formants import (TYPICAL_FORMANT_RANGES, FormantRanges, FormantTrack, apply_range_filter,
                       poly_roots, roots_to_formants, track_formants)
from .lpc import (FrameConfig, LpcModel, autocorrelation, frame_signal, levinson_durbin, lpc_analyze,
                  make_window)
from .opcount import OpCount
from .signal_io import (Signal, SynthVowelSpec, gen_sinusoid, gen_vowel, read_wav, remove_dc,
                        write_wav)
from .spectrum import SpectrogramConfig, fft, stft_spectrogram
