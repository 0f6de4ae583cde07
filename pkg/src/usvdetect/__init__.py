"""Detection of rodent ultrasonic vocalizations from spectrogram contours.

The pipeline resamples audio to a canonical rate, computes a band-limited
magnitude spectrogram, enhances it into a binary foreground mask (median
filter, Otsu thresholding, CLAHE, morphological closing), and reports the
bounding boxes of connected foreground regions as time/frequency call
annotations. Companion modules score annotations against gold labels at
sample resolution and compare scoring runs with paired t-tests.
"""

from .annotations import (AnnotationSet, GoldAdapter, UsvAnnotation, read_annotations,
                          read_gold, write_annotations)
from .audio import AudioRecording, WavInfo, load_wav, resample, wav_info, write_wav
from .config import PipelineConfig, config_from_dict, config_hash, config_to_dict, \
    load_config, save_config
from .detect import DetectionConfig, Region, extract_regions, filter_and_merge, \
    regions_to_annotations
from .enhance import (EnhanceConfig, clahe, enhance, enhance_stages, median_filter,
                      morph_close, normalize_to_u8, otsu_threshold)
from .evaluation import (AggregateReport, ConfusionCounts, LabelVector, MetricsReport,
                         aggregate, confusion, metrics, rasterize)
from .pipeline import DetectionResult, detect_file, detect_recording
from .spectrogram import Spectrogram, SpectrogramParams, compute_spectrogram
from .stats import TTestResult, paired_t_test, regularized_incomplete_beta, \
    student_t_two_tailed_p
from .synth import ChirpSpec, synthesize

__version__ = "0.1.0"

__all__ = [
    "AggregateReport", "AnnotationSet", "AudioRecording", "ChirpSpec", "ConfusionCounts",
    "DetectionConfig", "DetectionResult", "EnhanceConfig", "GoldAdapter", "LabelVector",
    "MetricsReport", "PipelineConfig", "Region", "Spectrogram", "SpectrogramParams",
    "TTestResult", "UsvAnnotation", "WavInfo", "aggregate", "clahe", "compute_spectrogram",
    "config_from_dict", "config_hash", "config_to_dict", "confusion", "detect_file",
    "detect_recording", "enhance", "enhance_stages", "extract_regions", "filter_and_merge",
    "load_config", "load_wav", "median_filter", "metrics", "morph_close", "normalize_to_u8",
    "otsu_threshold", "paired_t_test", "rasterize", "read_annotations", "read_gold",
    "regions_to_annotations", "regularized_incomplete_beta", "resample", "save_config",
    "student_t_two_tailed_p", "synthesize", "wav_info", "write_annotations", "write_wav",
    "__version__",
]
