"""Fixed point-pair test pattern for the 256-bit binary descriptor.

Each row is (x1, y1, x2, y2) relative to the keypoint; every point lies in a
disk of radius 15 so rotated samples stay inside the 31x31 patch.
Generated by tools/learn_brief_pattern.py.
"""

BRIEF_PATTERN = (
    (3, 6, 4, -10), (14, -5, 7, 5), (1, 1, 3, -14), (-8, 7, -11, -8),
    (5, -14, 5, 14), (7, 9, 4, 2), (-13, 2, -12, -3), (-9, 11, -7, 10),
    (-7, 0, -14, 2), (-8, -5, -13, -6), (-7, -2, -9, 6), (-6, -13, -3, -6),
    (11, 2, 11, -2), (0, 12, 0, -9), (-3, 1, -6, -11), (12, 9, 7, -8),
    (4, 12, 2, -3), (3, 11, 3, -11), (4, -8, 3, -4), (1, 7, 1, -6),
    (9, -5, 11, -6), (14, 5, 6, -1), (11, -4, 13, -1), (-12, -6, -14, -4),
    (3, -14, 2, -8), (-3, -4, -3, 3), (-7, -10, -10, -11), (-2, 14, -1, 6),
    (-6, 4, -10, 8), (6, 10, 5, 8), (-7, 1, -8, -4), (-9, -8, -6, -4),
    (-14, -1, -11, 4), (0, -13, 0, 8), (8, -7, 6, 3), (14, 2, 11, 6),
    (-3, -3, -4, 7), (11, -10, 4, 0), (7, -11, 9, -12), (-5, 7, -6, -9),
    (-6, 12, -3, -5), (10, 8, 8, 7), (-8, 12, -6, -11), (6, 5, 5, 0),
    (-4, 13, -3, 11), (0, 6, 0, 8), (-3, 12, -4, -13), (4, 14, 3, 12),
    (13, 6, 10, 7), (6, 10, 8, 12), (-9, 6, -13, 5), (1, -14, 1, 14),
    (13, -2, 9, -1), (6, 10, 9, -11), (4, -5, 3, 2), (5, -10, 7, -12),
    (-1, -4, -1, -6), (5, 9, 4, -7), (-2, 6, -2, -9), (-4, 7, -3, 4),
    (-2, -6, -2, -8), (12, -9, 14, 5), (-12, -9, -10, -10), (10, -9, 12, -8),
    (13, 4, 13, 1), (-7, -13, -4, -11), (7, 12, 9, 12), (-14, 5, -13, 7),
    (13, -7, 14, -5), (-10, 10, -12, 9), (-13, 7, -6, -7), (3, -5, 3, -3),
    (-11, -2, -11, -4), (1, 10, 2, 12), (9, 11, 12, 9), (-9, -3, -11, -1),
    (-8, 7, -10, 7), (7, 1, 6, -2), (13, -1, 14, -4), (8, -6, 8, -4),
    (7, -8, 14, -2), (10, 7, 9, 3), (-5, 10, -5, 8), (-8, 5, -11, 0),
    (-11, 2, -14, 4), (-10, -10, -14, 2), (-1, -10, 0, -8), (-5, -1, -6, 1),
    (7, 4, 11, 3), (-10, 6, -12, 8), (3, -10, 9, 12), (-13, -4, -4, 1),
    (-12, -9, -10, -7), (7, -2, 10, -2), (6, -10, 6, -7), (-9, -8, -12, -4),
    (-1, 14, -2, -3), (-2, -11, -1, -14), (-8, -12, -10, -10), (10, -6, 10, -9),
    (-9, 3, -6, 2), (3, 3, 4, -1), (15, 0, 13, -1), (10, -4, 8, 9),
    (6, 1, 8, 2), (7, -3, 5, -1), (2, -14, 5, -14), (-6, 13, -8, 12),
    (-4, -14, -1, -12), (11, 9, 11, 6), (-9, 10, -9, 12), (8, -12, 11, -9),
    (-12, -4, -10, 11), (-9, -11, -3, 11), (9, -8, 6, -8), (-5, 3, -6, 1),
    (7, -13, 1, 8), (5, 13, 3, 13), (-6, 10, -3, 8), (8, 9, 7, 11),
    (-5, -14, -7, -13), (-9, 9, -10, 5), (8, 6, 5, 5), (-5, -4, -6, -1),
    (-4, 13, -5, 11), (-10, -7, -9, -11), (2, -14, 0, -13), (-6, -4, -5, -7),
    (2, -1, 4, 3), (2, 14, 0, 13), (0, -10, 2, 4), (3, 11, 1, 14),
    (5, 10, 4, 12), (5, -12, 7, -11), (0, -11, -5, 14), (-4, -1, -6, -2),
    (10, 7, 3, -4), (-5, 13, -1, 13), (3, 8, 4, 5), (3, 14, 5, -8),
    (6, 6, 7, 4), (6, -13, 7, 5), (5, 12, 15, 0), (7, -10, 2, -6),
    (14, 4, 5, -12), (0, 6, -1, 4), (-8, -9, -4, -10), (-8, -5, -5, -5),
    (0, -11, -2, -7), (-4, -11, -15, 0), (-5, -13, -2, -14), (-3, -10, 0, 10),
    (-5, 6, -4, 8), (-5, -7, -3, -6), (-6, 4, -3, 2), (2, 11, -3, -14),
    (-3, -14, -12, 9), (5, 10, 1, -14), (3, 0, 1, 7), (5, -2, 7, -1),
    (7, 0, 4, 2), (3, 14, 12, -9), (-4, 11, -14, 4), (7, 9, 4, 10),
    (-4, 9, -8, -5), (-2, -13, -5, 7), (7, -5, 5, -7), (1, 11, -2, 12),
    (-10, 10, -1, -8), (1, 14, -7, -13), (5, 3, 3, 3), (1, 1, 4, -2),
    (0, -15, -5, 11), (14, -4, 1, -2), (-4, 14, 2, -5), (3, -9, -1, 5),
    (2, -12, -2, 11), (-7, -6, -3, -14), (-9, 3, -4, -9), (0, 9, 2, 10),
    (-4, 7, -8, 6), (-7, -12, 0, 7), (11, 8, 2, -14), (0, -2, -12, -8),
    (2, 8, 10, -8), (5, 13, -1, -8), (-3, -12, 2, -11), (1, -11, 5, -7),
    (8, 0, 5, 14), (0, -15, -4, 2), (3, -10, 0, -9), (1, -14, 5, 0),
    (-3, 9, 1, -9), (-5, 13, -9, -1), (-6, 8, -1, 10), (7, 13, -2, -13),
    (-5, -5, -3, -6), (-5, 0, -2, -2), (3, 9, -1, -9), (-2, 6, -5, 2),
    (-2, 13, -14, -4), (-2, -3, -12, 1), (7, -13, -3, 14), (5, 9, 1, 9),
    (13, 6, 1, 14), (4, -14, 12, -3), (-1, 3, 8, -11), (2, -7, -1, -4),
    (2, 10, 7, -4), (-2, 9, 2, 6), (9, 3, 3, -8), (-4, -7, -1, -8),
    (11, -1, 3, 7), (-2, -5, 2, 1), (6, -6, 1, -4), (11, 9, -1, 4),
    (2, 6, 0, 5), (3, 2, -5, -14), (1, -6, -1, -7), (1, 14, -5, -8),
    (1, -13, -13, -7), (-5, 4, 3, 14), (-1, 11, 10, -11), (1, -4, 5, 1),
    (3, -13, -9, 12), (-5, -6, 0, 8), (5, -14, -8, -10), (-11, 10, 2, 2),
    (-3, 6, 2, -4), (-3, -1, 0, -4), (0, -4, -9, 7), (-4, 8, 4, -14),
    (5, 9, -2, -2), (-4, -3, 7, -13), (5, -8, -1, 9), (0, -10, 7, 7),
    (10, 11, -2, -5), (-1, 5, -11, -2), (14, -4, -3, -13), (11, 9, -4, -14),
    (13, 3, 0, -6), (-11, -10, 5, 14), (-1, 12, 7, 2), (4, -4, 0, -6),
    (-7, 1, 0, -10), (5, 7, -7, 12), (11, 2, -1, -14), (-3, 4, 1, 3),
    (1, 4, -9, -8), (1, -13, -11, 5), (8, -7, -2, 14), (-14, 4, 2, 5),
    (-2, 3, 15, 0), (15, 0, -3, 11), (1, -3, -5, -4), (7, -13, -12, 9),
)
