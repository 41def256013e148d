#pragma once

// libtorch's logging header defines CHECK and CHECK_EQ-style macros; the test
// files use doctest's, so drop torch's before doctest defines its own.
#undef CHECK
#undef CHECK_EQ
#undef CHECK_NE
#undef CHECK_LT
#undef CHECK_LE
#undef CHECK_GT
#undef CHECK_GE
#include <doctest.h>
