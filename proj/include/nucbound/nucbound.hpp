#ifndef NUCBOUND_NUCBOUND_HPP
#define NUCBOUND_NUCBOUND_HPP

#include <nucbound/bounds.hpp>
#include <nucbound/error.hpp>
#include <nucbound/io.hpp>
#include <nucbound/linalg.hpp>
#include <nucbound/oracle.hpp>
#include <nucbound/tensor.hpp>

#endif // NUCBOUND_NUCBOUND_HPP
