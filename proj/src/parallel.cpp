#include "shb/parallel.hpp"

#include <omp.h>

namespace shb {

int worker_count() { return omp_get_max_threads(); }

}  // namespace shb
