"""Second-order central finite-difference stencils."""


def d1(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def d2(f, x, h):
    return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)


def d3(f, x, h):
    return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h**3)
