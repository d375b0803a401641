# app/core/published_tables.py - Published reference values for Lad's G9 simulations
from fractions import Fraction
from typing import Dict, Tuple

# Fraction of -1 results for the 1:1:2 mixture of G9-2:G9-3:G9-4
PUBLISHED_TABLE_2: Tuple[Fraction, ...] = (
    Fraction(1), Fraction(1, 4), Fraction(1, 4),
    Fraction(1, 4), Fraction(1), Fraction(1, 2),
    Fraction(1, 4), Fraction(1, 2), Fraction(1),
)

# Total -1 results per setting pair for relation 23, 1,000,000 G9 vectors
PUBLISHED_TABLE_3_RELATION = "23"
PUBLISHED_TABLE_3_N = 1_000_000
PUBLISHED_TABLE_3: Tuple[int, ...] = (
    1000000, 250191, 250332, 250191, 1000000, 625225, 250332, 625225, 1000000,
)

# G9-1..G9-4 occurrence counts for each functional relation
PUBLISHED_TABLE_4: Dict[str, Tuple[int, int, int, int]] = {
    "23": (62874, 187317, 187458, 562351),
    "26": (62527, 187114, 562974, 187385),
    "27": (62281, 187815, 187993, 561911),
    "28": (62754, 187434, 562506, 187306),
    "34": (62756, 188021, 187641, 561582),
    "36": (62561, 562898, 187288, 187253),
    "38": (62893, 561997, 187726, 187384),
    "46": (62410, 187683, 562462, 187445),
    "47": (62306, 187334, 187410, 562950),
    "48": (62276, 187207, 563382, 187135),
    "67": (62595, 562911, 187115, 187379),
    "78": (62454, 563037, 187282, 187227),
}

# Same / Different counts quoted for Table 4 column 23
PUBLISHED_SAME_23 = 1_874_252
PUBLISHED_DIFFERENT_23 = 3_748_504
