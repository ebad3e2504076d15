"""
Project-wide constants for commands, input variants, subsets and file formats.
"""

# CLI commands
CMD_INGEST = "ingest"
CMD_EXTRACT = "extract"
CMD_SPLIT = "split"
CMD_TRAIN = "train"
CMD_EVAL = "eval"
CMD_PREDICT = "predict"
CMD_EXPERIMENT = "experiment"
CMD_SUMMARIZE = "summarize"

COMMANDS = (
    CMD_INGEST,
    CMD_EXTRACT,
    CMD_SPLIT,
    CMD_TRAIN,
    CMD_EVAL,
    CMD_PREDICT,
    CMD_EXPERIMENT,
    CMD_SUMMARIZE,
)

# Input variants (channel order is always frame, onset, velocity)
VARIANT_FRAME = "frame"
VARIANT_ONSET = "onset"
VARIANT_FRAME_ONSET = "frame+onset"
VARIANT_ALL_ROLLS = "frame+onset+velocity"
VARIANT_LOGMEL = "logmel"

ROLL_VARIANTS = {
    VARIANT_FRAME: ("frame",),
    VARIANT_ONSET: ("onset",),
    VARIANT_FRAME_ONSET: ("frame", "onset"),
    VARIANT_ALL_ROLLS: ("frame", "onset", "velocity"),
}
VARIANTS = (*ROLL_VARIANTS, VARIANT_LOGMEL)

# Architectures
ARCH_CNN = "cnn"
ARCH_CRNN = "crnn"
ARCHITECTURES = (ARCH_CNN, ARCH_CRNN)

# Split subsets
SUBSET_TRAIN = "train"
SUBSET_VALIDATION = "validation"
SUBSET_TEST = "test"
SUBSETS = (SUBSET_TRAIN, SUBSET_VALIDATION, SUBSET_TEST)
SPLIT_RATIOS = (0.8, 0.1, 0.1)

# Piano keyboard
LOWEST_PITCH = 21
HIGHEST_PITCH = 108
NUM_PITCHES = HIGHEST_PITCH - LOWEST_PITCH + 1

# Clip segmentation (seconds)
CLIP_SECONDS = 30.0
MIN_TAIL_SECONDS = 15.0
MIN_SHORT_PIECE_SECONDS = 5.0

# Roll and audio front end
DEFAULT_FPS = 100
SAMPLE_RATE = 16000
WINDOW_SIZE = 1024
HOP_SIZE = 160
N_MELS = 64
MEL_FMIN = 30.0
MEL_FMAX = 8000.0
LOG_FLOOR = 1e-10

# Training protocol
BATCH_SIZE = 16
LEARNING_RATE = 0.001
MAX_EPOCHS = 100
EARLY_STOP_PATIENCE = 10

# File magics
CACHE_MAGIC = b"CCF1"
CHECKPOINT_MAGIC = b"CCKP"
CHECKPOINT_VERSION = 1

# Default file names inside an experiment output directory
SPLIT_FILE = "split.tsv"
SPLIT_SUMMARY_FILE = "split_summary.tsv"
TRAIN_LOG_FILE = "train_log.tsv"
CHECKPOINT_FILE = "model.cckp"
CLIP_REPORT_FILE = "report_clip.txt"
PIECE_REPORT_FILE = "report_piece.txt"
CONFIG_FILE = "config.txt"
