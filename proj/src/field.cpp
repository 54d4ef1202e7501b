#include "choquard/field.hpp"

namespace chq {

RealField real_part(const ComplexField& u) {
  RealField out(u.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i].real();
  return out;
}

RealField imag_part(const ComplexField& u) {
  RealField out(u.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i].imag();
  return out;
}

RealField modulus(const ComplexField& u) {
  RealField out(u.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::abs(u[i]);
  return out;
}

ComplexField to_complex(const RealField& re) {
  ComplexField out(re.grid_ptr());
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = re[i];
  return out;
}

ComplexField to_complex(const RealField& re, const RealField& im) {
  re.check_same_grid(im);
  ComplexField out(re.grid_ptr());
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = cplx(re[i], im[i]);
  return out;
}

}  // namespace chq
