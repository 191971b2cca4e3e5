"""asrkit: corpus preparation, augmentation, and WER/CER scoring for
low-resource ASR."""

from .audio import (
    AudioClip,
    ResampleSpec,
    detect_silence,
    read_wav,
    resample,
    rms,
    write_wav,
)
from .augment import (
    AugmentationSpec,
    BandStopSpec,
    NoiseSpec,
    PitchShiftSpec,
    Rng,
    apply,
    band_stop,
    default_augmentations,
    noise_inject,
    pitch_shift,
    spec_from_record,
    spec_to_record,
)
from .corpus import (
    ClipRecord,
    ExperimentPlan,
    Manifest,
    PlannedDataset,
    build_plan,
    ingest_tsv,
    materialize,
    qc,
    select_subset,
    write_manifest,
)
from .metrics import (
    Alignment,
    AlignStep,
    EditCounts,
    ScoreReport,
    cer,
    edit_counts,
    score_corpus,
    wer,
)
from .textnorm import (
    ARABIC_DIACRITICS,
    NormalizationConfig,
    diacritic_density,
    normalize,
    strip_diacritics,
)

__version__ = "0.1.0"
