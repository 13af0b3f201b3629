#include "tnc/error.hpp"
