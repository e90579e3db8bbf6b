#include <pybind11/pybind11.h>
PYBIND11_MODULE(_lpbmk, m) { m.doc() = "placeholder"; }
