# cython: language_level=3, boundscheck=False, cdivision=True
"""Compiled rollout kernel; arithmetic twin of vib2move._reference.

Must stay operation-for-operation identical to the pure-Python kernel so
trajectories are bit-reproducible across backends. Compiled without
-ffast-math for the same reason.
"""

from libc.math cimport cos, fabs, fmod, sin, sqrt

cdef double _PI = 3.141592653589793
cdef double _TWO_PI = 6.283185307179586

STATUS_BUDGET = 0
STATUS_REST = 1
STATUS_DROPPED = 2
STATUS_TARGET = 3


def rollout_core(
    double ox, double oy, double oth,
    double fx, double fy, double fth,
    double pdx, double pdy,
    double cdx, double cdy,
    double hx, double hy,
    double mass, double gravity, double a3,
    double ds, long n_max, double stop_eps, bint record,
    double stop_travel=-1.0, double stop_rot=-1.0,
):
    """See vib2move._reference.rollout_core."""
    cdef double cf = cos(fth)
    cdef double sf = sin(fth)
    cdef double pcx = fx + cf * pdx - sf * pdy
    cdef double pcy = fy + sf * pdx + cf * pdy
    cdef double mg = mass * gravity
    cdef double a3sq = a3 * a3
    cdef double co, so, comx, comy, xc, wy, wt, ty, tw, n, uy, uw, tt, k, h
    cdef double phi, cphi, sphi, rx, ry, r, dx, dy, lx, ly
    cdef double travel = 0.0
    cdef double rot = 0.0
    cdef double step_t, step_r
    cdef long i, n_done = 0
    cdef int status = 0
    records = []
    uy = 0.0
    uw = 0.0
    k = 0.0
    for i in range(n_max):
        co = cos(oth)
        so = sin(oth)
        comx = ox + co * cdx - so * cdy
        comy = oy + so * cdx + co * cdy
        xc = comx - pcx
        if stop_eps > 0.0 and comy < pcy and fabs(xc) < stop_eps:
            status = 1
            break
        wy = -mg
        wt = -mg * xc
        ty = wy
        tw = wt / a3sq
        n = sqrt(ty * ty + tw * tw)
        uy = ty / n
        uw = tw / n
        tt = wt / a3
        k = 1.0 / (wy * wy + tt * tt)
        h = ds * k
        phi = uw * h
        # predictive stop: do not take a step that would overshoot a stop
        # target by more than half the step itself
        if stop_travel > 0.0:
            step_t = h * fabs(uy)
            if travel + step_t > stop_travel and stop_travel - travel < 0.5 * step_t:
                status = 3
                break
        if stop_rot > 0.0:
            step_r = fabs(phi)
            if rot + step_r > stop_rot and stop_rot - rot < 0.5 * step_r:
                status = 3
                break
        cphi = cos(phi)
        sphi = sin(phi)
        rx = ox - pcx
        ry = oy - pcy
        ox = pcx + cphi * rx - sphi * ry
        oy = pcy + sphi * rx + cphi * ry + uy * h
        oth = oth + phi
        r = fmod(oth + _PI, _TWO_PI)
        if r <= 0.0:
            r += _TWO_PI
        oth = r - _PI
        n_done = i + 1
        if record:
            records.append((ox, oy, oth, uy, uw, k, xc))
        co = cos(oth)
        so = sin(oth)
        dx = pcx - ox
        dy = pcy - oy
        lx = co * dx + so * dy
        ly = -so * dx + co * dy
        if lx > hx or -lx > hx or ly > hy or -ly > hy:
            status = 2
            break
        travel += h * fabs(uy)
        rot += fabs(phi)
        if (stop_travel > 0.0 and travel >= stop_travel) or (stop_rot > 0.0 and rot >= stop_rot):
            status = 3
            break
    return status, n_done, ox, oy, oth, records
