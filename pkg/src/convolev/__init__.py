"""Convoluted set-valued Lévy integrals: kernels, drivers, set values and experiments."""
from .errors import ConvolevError
from .kernels import (Kernel, l2_norm_sq, make_exponential, make_kernel, make_molchan_golosov,
                      make_product, make_riemann_liouville)
from .levy import (CompoundPoisson, LevyDriverSpec, NoJumps, PathRealization, SymmetricStable,
                   holtsmark, sample_path)
from .setval import (Exploded, ExtendedSetValue, Interval, SetValue, convex_hull, hausdorff,
                     minkowski_sum)
from .svint import (SelectorFamily, aumann_interval_integral, constant_selector,
                    integral_functional, mark_linear_selector, sv_integral)

__version__ = "0.1.0"
