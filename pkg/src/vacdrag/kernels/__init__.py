"""Kernel backend selection.

The compiled Cython core is used when it imported successfully; the
numpy fallback otherwise.  ``VACDRAG_PURE=1`` forces the fallback.  Bulk
vectorized helpers (branch scans) always go through the numpy module,
scalar hot-path calls go through the selected backend.
"""

import os

from . import _fallback as numpy_impl

if os.environ.get("VACDRAG_PURE", "0") not in ("1", "true", "yes"):
    try:
        from . import _core as impl
    except ImportError:
        impl = numpy_impl
else:
    impl = numpy_impl

POL_S = numpy_impl.POL_S
POL_P = numpy_impl.POL_P
KIND_SLAB = numpy_impl.KIND_SLAB
KIND_SHEET = numpy_impl.KIND_SHEET

gamma = impl.gamma
gamma_array = numpy_impl.gamma_array
reflection_slab = impl.reflection_slab
reflection_slab_parts = impl.reflection_slab_parts
reflection_sheet = impl.reflection_sheet
slab_scan = impl.slab_scan
slab_scan_array = numpy_impl.slab_scan_array
characteristic = impl.characteristic
characteristic_array = impl.characteristic_array


def backend_name():
    return impl.BACKEND
