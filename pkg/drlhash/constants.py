"""Project-wide constants used by drl-hash.

File magics, default hyperparameters, the primitive polynomial table used to
build GF(2^m), and CLI exit codes. The module is stdlib-only.
"""

HISTORY_DEPTH = 10
WORD_BITS = 64

MIN_FIELD_DEGREE = 3
MAX_FIELD_DEGREE = 16
EXHAUSTIVE_MAX_K = 16

# Bitmask of a primitive polynomial per extension degree m (bit i = coeff of x^i).
PRIMITIVE_POLYNOMIALS = {
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,  # x^9 + x^4 + 1
    10: 0b10000001001,  # x^10 + x^3 + 1
    11: 0b100000000101,  # x^11 + x^2 + 1
    12: 0b1000001010011,  # x^12 + x^6 + x^4 + x + 1
    13: 0b10000000011011,  # x^13 + x^4 + x^3 + x + 1
    14: 0b100010001000011,  # x^14 + x^10 + x^6 + x + 1
    15: 0b1000000000000011,  # x^15 + x + 1
    16: 0b10001000000001011,  # x^16 + x^12 + x^3 + x + 1
}

CODEBOOK_HEADER_PREFIX = "# drlh-codebook v1"
FEATURE_MAGIC = b"DRLHFV1"
MODEL_MAGIC = b"DRLHQN1"

DEFAULT_SIGMA = 5.0
DEFAULT_HIDDEN = (512, 512)
DEFAULT_DROPOUT = 0.2
DEFAULT_LEARNING_RATE = 1e-3

DEFAULT_TOP_K = 5000
DEFAULT_PRECISION_KS = (1, 10, 100, 1000)

SPLITS = ("train", "query", "database")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INFEASIBLE = 2
