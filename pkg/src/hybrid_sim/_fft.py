"""FFT backend.

Forward transforms use the ``exp(-ikx)`` kernel without normalization, the
inverse carries the ``1/N`` factor (the numpy convention). pyfftw is used
when importable, planned with ``FFTW_ESTIMATE`` so that repeated runs pick
the same plan and produce identical bits; otherwise scipy.fft.
"""
import os

import numpy as np
import scipy.fft

try:
    import pyfftw
    import pyfftw.interfaces.cache
    import pyfftw.interfaces.numpy_fft as _pf
except ImportError:  # pragma: no cover - exercised only without pyfftw
    pyfftw = None


def n_threads():
    try:
        return max(1, int(os.environ.get("HYBRID_SIM_THREADS", "1")))
    except ValueError:
        return 1


if pyfftw is not None:
    pyfftw.interfaces.cache.enable()
    pyfftw.interfaces.cache.set_keepalive_time(300)

    def fftn(a, axes=None):
        return _pf.fftn(a, axes=axes, threads=n_threads(),
                        planner_effort="FFTW_ESTIMATE")

    def ifftn(a, axes=None):
        return _pf.ifftn(a, axes=axes, threads=n_threads(),
                         planner_effort="FFTW_ESTIMATE")

    class InPlace:
        """Forward/backward transform pair over one aligned buffer, all axes.

        ``backward`` is unnormalized; callers fold ``scale`` = 1/N into a
        multiplication they do anyway.
        """

        def __init__(self, shape):
            self.buf = pyfftw.empty_aligned(shape, dtype=np.complex128)
            axes = tuple(range(len(shape)))
            kw = dict(axes=axes, flags=("FFTW_ESTIMATE",), threads=n_threads())
            self.forward = pyfftw.FFTW(self.buf, self.buf, direction="FFTW_FORWARD", **kw)
            self.backward = pyfftw.FFTW(self.buf, self.buf, direction="FFTW_BACKWARD",
                                        normalise_idft=False, **kw)
            self.scale = 1.0 / self.buf.size

    BACKEND = "pyfftw"
else:  # pragma: no cover
    def fftn(a, axes=None):
        return scipy.fft.fftn(a, axes=axes, workers=n_threads())

    def ifftn(a, axes=None):
        return scipy.fft.ifftn(a, axes=axes, workers=n_threads())

    class InPlace:
        def __init__(self, shape):
            self.buf = np.empty(shape, dtype=np.complex128)
            self.scale = 1.0 / self.buf.size

        def forward(self):
            self.buf[...] = scipy.fft.fftn(self.buf, workers=n_threads())

        def backward(self):
            self.buf[...] = scipy.fft.ifftn(self.buf, norm="forward", workers=n_threads())

    BACKEND = "scipy"
