"""Words in the free group on x, y (upper case letters are inverses).

Includes Farey slope words and automorphisms realizing a change of marking,
built from elementary Nielsen moves so that inverses come for free.
"""

from __future__ import annotations

from math import gcd
from typing import Iterator

import numpy as np

LETTERS = "xXyY"
_INV = {"x": "X", "X": "x", "y": "Y", "Y": "y"}


def reduce_word(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if ch not in _INV:
            raise ValueError(f"invalid letter {ch!r} in word {word!r}")
        if out and out[-1] == _INV[ch]:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def inverse_word(word: str) -> str:
    return "".join(_INV[ch] for ch in reversed(word))


def substitute(word: str, x_image: str, y_image: str) -> str:
    images = {"x": x_image, "X": inverse_word(x_image), "y": y_image, "Y": inverse_word(y_image)}
    return reduce_word("".join(images[ch] for ch in word))


def homology(word: str) -> tuple[int, int]:
    """Abelianization (x-exponent sum, y-exponent sum)."""
    return (word.count("x") - word.count("X"), word.count("y") - word.count("Y"))


def reduced_words(max_length: int) -> Iterator[str]:
    """All freely reduced words of length <= max_length, shortest first."""
    level = [""]
    yield ""
    for _ in range(max_length):
        nxt = []
        for w in level:
            for ch in LETTERS:
                if w and w[-1] == _INV[ch]:
                    continue
                nxt.append(w + ch)
        yield from nxt
        level = nxt


def normalize_slope(p: int, q: int) -> tuple[int, int]:
    if (p, q) == (0, 0):
        raise ValueError("slope 0/0 is undefined")
    if gcd(abs(p), abs(q)) != 1:
        raise ValueError(f"slope {p}/{q} is not in lowest terms")
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return p, q


def slope_word(p: int, q: int) -> str:
    """Farey word of the slope p/q: 0/1 -> x, 1/0 -> y, mediants concatenate.

    The word has x-exponent sum q and y-exponent sum p. Negative slopes are the
    images of positive ones under y -> y^-1.
    """
    p, q = normalize_slope(p, q)
    if p < 0:
        return slope_word(-p, q).replace("y", "Y")
    if q == 0:
        return "y"
    if p == 0:
        return "x"
    left, right = (0, 1, "x"), (1, 0, "y")
    while True:
        mp, mq = left[0] + right[0], left[1] + right[1]
        word = left[2] + right[2]
        if (mp, mq) == (p, q):
            return word
        if p * mq < mp * q:
            right = (mp, mq, word)
        else:
            left = (mp, mq, word)


# Elementary automorphisms, as (x image, y image) with their homology matrices
# whose columns are the images of [x] and [y].
def _elementary(kind: str, k: int = 0) -> tuple[str, str]:
    if kind == "add_x_to_y":  # y -> y x^k
        return "x", reduce_word("y" + ("x" * k if k >= 0 else "X" * -k))
    if kind == "add_y_to_x":  # x -> x y^k
        return reduce_word("x" + ("y" * k if k >= 0 else "Y" * -k)), "y"
    if kind == "swap":
        return "y", "x"
    if kind == "neg_x":
        return "X", "y"
    if kind == "neg_y":
        return "x", "Y"
    raise ValueError(kind)


def _inverse_elementary(kind: str, k: int) -> tuple[str, int]:
    if kind in ("add_x_to_y", "add_y_to_x"):
        return kind, -k
    return kind, k


def _apply_column_op(H: np.ndarray, kind: str, k: int) -> np.ndarray:
    H = H.copy()
    if kind == "add_x_to_y":
        H[:, 1] += k * H[:, 0]
    elif kind == "add_y_to_x":
        H[:, 0] += k * H[:, 1]
    elif kind == "swap":
        H = H[:, ::-1].copy()
    elif kind == "neg_x":
        H[:, 0] *= -1
    elif kind == "neg_y":
        H[:, 1] *= -1
    return H


def _reduce_to_identity(H: np.ndarray) -> list[tuple[str, int]]:
    """Column operations F1..Fm with H F1 ... Fm = I (Euclid on the first row)."""
    ops: list[tuple[str, int]] = []

    def do(kind, k=0):
        nonlocal H
        H = _apply_column_op(H, kind, k)
        ops.append((kind, k))

    while H[0, 0] != 0 and H[0, 1] != 0:
        if abs(H[0, 0]) >= abs(H[0, 1]):
            do("add_y_to_x", -(H[0, 0] // H[0, 1]))
        else:
            do("add_x_to_y", -(H[0, 1] // H[0, 0]))
    if H[0, 0] == 0:
        do("swap")
    if H[0, 0] < 0:
        do("neg_x")
    if H[1, 1] < 0:
        do("neg_y")
    if H[1, 0] != 0:
        do("add_y_to_x", -H[1, 0])
    if not np.array_equal(H, np.eye(2, dtype=int)):
        raise ValueError("matrix is not in GL(2, Z)")
    return ops


def _compose_images(ops: list[tuple[str, int]]) -> tuple[str, str]:
    """Images of x, y under the composite e1 o e2 o ... of elementary automorphisms."""
    img = ("x", "y")
    for kind, k in ops:
        ex, ey = _elementary(kind, k)
        img = (substitute(ex, *img), substitute(ey, *img))
    return img


class Automorphism:
    """Automorphism of F(x, y) with a prescribed action on homology.

    ``images`` are the words phi(x), phi(y); ``inverse_images`` are words u, v
    with u(phi(x), phi(y)) = x and v(phi(x), phi(y)) = y.
    """

    def __init__(self, H=None, *, images=None, inverse_images=None):
        if images is not None:
            self.images = tuple(images)
            self.inverse_images = tuple(inverse_images)
            if (substitute(self.inverse_images[0], *self.images), substitute(self.inverse_images[1], *self.images)) != ("x", "y"):
                raise ValueError("inverse_images do not invert images")
            hx, hy = homology(self.images[0]), homology(self.images[1])
            self.homology = np.array([[hx[0], hy[0]], [hx[1], hy[1]]], dtype=int)
            return
        H = np.array(H, dtype=int).reshape(2, 2)
        det = int(round(np.linalg.det(H)))
        if abs(det) != 1:
            raise ValueError(f"homology matrix must have determinant +-1, got {det}")
        self.homology = H
        ops = _reduce_to_identity(H)
        # H = F_m^-1 ... F_1^-1, so phi = f(F_m^-1) o ... o f(F_1^-1)
        self.images = _compose_images([_inverse_elementary(*op) for op in reversed(ops)])
        self.inverse_images = _compose_images(ops)

    def __call__(self, word: str) -> str:
        return substitute(word, *self.images)

    def inverse(self, word: str) -> str:
        return substitute(word, *self.inverse_images)


def slope_automorphism(p: int, q: int) -> Automorphism:
    """Orientation-preserving automorphism with x -> slope_word(p, q).

    For a Farey mediant W = LR the image of y is the right parent R, so both
    images are cyclically reduced Christoffel words; inverses are tracked
    through the Stern-Brocot moves (u, v) -> (u, uv) and (u, v) -> (uv, v).
    """
    p, q = normalize_slope(p, q)
    if p < 0:
        pos = slope_automorphism(-p, q)
        flip = lambda w: w.translate(str.maketrans("yY", "Yy"))
        # conjugate by y -> y^-1 on both sides so the determinant stays +1
        images = (flip(pos.images[0]), inverse_word(flip(pos.images[1])))
        inv = (flip(pos.inverse_images[0]), flip(inverse_word(pos.inverse_images[1])))
        return Automorphism(images=images, inverse_images=inv)
    if q == 0:
        return Automorphism(images=("y", "X"), inverse_images=("Y", "x"))
    if p == 0:
        return Automorphism(images=("x", "y"), inverse_images=("x", "y"))
    # basis (u, v) with x, y written in the letters x, y standing for u, v
    u, v = "x", "y"
    ex, ey = "x", "y"
    lo, hi = (0, 1), (1, 0)
    while True:
        mp, mq = lo[0] + hi[0], lo[1] + hi[1]
        if (mp, mq) == (p, q):
            # final basis (uv, v): u = u' v'^-1
            return Automorphism(
                images=(u + v, v), inverse_images=(substitute(ex, "xY", "y"), substitute(ey, "xY", "y"))
            )
        if p * mq < mp * q:
            # (u, v) -> (u, uv): v = u'^-1 v'
            u, v = u, u + v
            ex, ey = substitute(ex, "x", "Xy"), substitute(ey, "x", "Xy")
            hi = (mp, mq)
        else:
            # (u, v) -> (uv, v): u = u' v'^-1
            u, v = u + v, v
            ex, ey = substitute(ex, "xY", "y"), substitute(ey, "xY", "y")
            lo = (mp, mq)
