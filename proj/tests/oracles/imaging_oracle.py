"""Reference values for resampling, blurring and the transform; frozen into
tests/test_imaging.cpp."""
import numpy as np
from scipy import ndimage


def bilinear_corner_aligned(src, w, h):
    sh, sw = src.shape
    ys = np.linspace(0, sh - 1, h) if h > 1 else np.array([(sh - 1) / 2])
    xs = np.linspace(0, sw - 1, w) if w > 1 else np.array([(sw - 1) / 2])
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return ndimage.map_coordinates(src, [yy, xx], order=1, mode="nearest")


def kernel(sigma):
    r = int(np.ceil(3 * sigma))
    k = np.exp(-0.5 * np.arange(-r, r + 1) ** 2 / sigma ** 2)
    return k / k.sum()


def blur(m, sigma):
    k = kernel(sigma)
    return ndimage.correlate1d(ndimage.correlate1d(m, k, axis=1, mode="nearest"), k, axis=0, mode="nearest")


def main():
    src = np.array([[0.0, 0.2, 1.0], [0.5, 0.3, 0.9]])
    out = bilinear_corner_aligned(src, 5, 4)
    print("resize 3x2->5x4 rows:")
    for row in out:
        print("  {" + ", ".join("%.17g" % v for v in row) + "},")
    d = np.zeros((9, 9))
    d[4, 4] = 1
    print("delta blur sigma 1 center %.17g, kernel peak^2 %.17g" % (blur(d, 1.0)[4, 4], kernel(1.0)[3] ** 2))
    y, x = np.mgrid[0:5, 0:7]
    m = np.cos(0.9 * x) * np.sin(0.4 * y + 0.3)
    b = blur(m, 1.3)
    print("wave blur sigma 1.3 at (x=0,y=0) %.17g (x=3,y=2) %.17g (x=6,y=4) %.17g" % (b[0, 0], b[2, 3], b[4, 6]))
    f = np.fft.fft2(m)
    print("dft of wave: F[0,0] %.17g%+.17gi F[1,2] (ky=1,kx=2) %.17g%+.17gi" % (f[0, 0].real, f[0, 0].imag, f[1, 2].real, f[1, 2].imag))


if __name__ == "__main__":
    main()
