"""Hand-enumerated permutation sums shared by the tests."""


def hand_p2(S, a, b, t1, t2):
    return 0.5 * (a(t1) * b(t2) + S.raw(t2 - t1) * a(t2) * b(t1))


def hand_p3(S, a, b, c, t1, t2, t3):
    s21, s31, s32 = S.raw(t2 - t1), S.raw(t3 - t1), S.raw(t3 - t2)
    return (
        a(t1) * b(t2) * c(t3)
        + s32 * a(t1) * b(t3) * c(t2)
        + s21 * a(t2) * b(t1) * c(t3)
        + s21 * s31 * a(t2) * b(t3) * c(t1)
        + s31 * s32 * a(t3) * b(t1) * c(t2)
        + s21 * s31 * s32 * a(t3) * b(t2) * c(t1)
    ) / 6
