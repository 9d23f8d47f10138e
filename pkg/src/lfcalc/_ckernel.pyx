# Compiled build of the kernel: same source as _kernel.py.
include "_kernel.py"
