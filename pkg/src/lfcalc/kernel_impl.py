"""Select the compiled kernel when it is built, else the interpreted one.

Set ``LFCALC_PURE=1`` to force the pure-Python module.
"""
import os

if os.environ.get("LFCALC_PURE"):
    from ._kernel import *  # noqa: F401,F403
    from ._kernel import Kernel, addto, code_of, dorder_of, gen_of, poly_addto  # noqa: F401

    COMPILED = False
else:
    try:
        from ._ckernel import *  # noqa: F401,F403
        from ._ckernel import Kernel, addto, code_of, dorder_of, gen_of, poly_addto  # noqa: F401

        COMPILED = True
    except ImportError:
        from ._kernel import *  # noqa: F401,F403
        from ._kernel import Kernel, addto, code_of, dorder_of, gen_of, poly_addto  # noqa: F401

        COMPILED = False
