#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pupilscope/pupilscope.hpp"

namespace py = pybind11;
using namespace pupilscope;

namespace {

using Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

py::array_t<std::uint8_t> channel_array(const Frame& f, const std::vector<std::uint8_t>& data) {
  py::array_t<std::uint8_t> out({f.height(), f.width()});
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

std::vector<std::uint8_t> to_vector(const Array& a, int& w, int& h) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "expected a 2-D uint8 array");
  h = static_cast<int>(a.shape(0));
  w = static_cast<int>(a.shape(1));
  return {a.data(), a.data() + a.size()};
}

Frame frame_from_arrays(const Array& luma, std::optional<Array> satv, long index) {
  int w = 0, h = 0;
  auto l = to_vector(luma, w, h);
  if (!satv) return Frame::from_gray(w, h, std::move(l), index);
  int sw = 0, sh = 0;
  auto s = to_vector(*satv, sw, sh);
  if (sw != w || sh != h) throw Error(ErrorCode::InvalidArgument, "channel shapes differ");
  return {w, h, std::move(l), std::move(s), index};
}

Frame frame_from_rgb(const Array& rgb, long index) {
  if (rgb.ndim() != 3 || rgb.shape(2) != 3) {
    throw Error(ErrorCode::InvalidArgument, "expected an (h, w, 3) uint8 array");
  }
  RgbImage img(static_cast<int>(rgb.shape(1)), static_cast<int>(rgb.shape(0)));
  std::copy(rgb.data(), rgb.data() + rgb.size(), img.rgb.begin());
  return Frame::from_rgb(img, index);
}

}  // namespace

PYBIND11_MODULE(_pupilscope, m) {
  m.doc() = "Iris and pupil detection for low-resolution eye images";

  // Leaked on purpose: the type must outlive the module's translators.
  static py::handle error_type =
      py::exception<Error>(m, "PupilscopeError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type(std::string(error_code_name(e.code())) + ": " + e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::enum_<Side>(m, "Side").value("LEFT", Side::Left).value("RIGHT", Side::Right);

  m.def("to_luma_satv", [](int r, int g, int b) {
    if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
      throw Error(ErrorCode::InvalidArgument, "channel values must be in [0, 255]");
    }
    const LumaSatv v = to_luma_satv(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                    static_cast<std::uint8_t>(b));
    return py::make_tuple(v.luma, v.satv);
  });

  py::class_<Frame>(m, "Frame")
      .def_static("from_arrays", &frame_from_arrays, py::arg("luma"),
                  py::arg("satv") = py::none(), py::arg("frame_index") = 0)
      .def_static("from_rgb", &frame_from_rgb, py::arg("rgb"), py::arg("frame_index") = 0)
      .def_property_readonly("width", &Frame::width)
      .def_property_readonly("height", &Frame::height)
      .def_property_readonly("frame_index", &Frame::frame_index)
      .def("luma", [](const Frame& f) { return channel_array(f, f.luma_data()); })
      .def("satv", [](const Frame& f) { return channel_array(f, f.satv_data()); })
      .def("__eq__", [](const Frame& a, const Frame& b) { return a == b; });

  m.def("load_frame", &load_frame, py::arg("path"), py::arg("frame_index") = 0);

  py::class_<EyeRegion>(m, "EyeRegion")
      .def(py::init([](int x, int y, int w, int h, Side side) {
             return EyeRegion{x, y, w, h, side};
           }),
           py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"), py::arg("side") = Side::Left)
      .def_readwrite("x", &EyeRegion::x)
      .def_readwrite("y", &EyeRegion::y)
      .def_readwrite("w", &EyeRegion::w)
      .def_readwrite("h", &EyeRegion::h)
      .def_readwrite("side", &EyeRegion::side)
      .def("__repr__", [](const EyeRegion& r) {
        return "EyeRegion(" + std::to_string(r.x) + ", " + std::to_string(r.y) + ", " +
               std::to_string(r.w) + ", " + std::to_string(r.h) + ")";
      });

  py::class_<IrisEstimate>(m, "IrisEstimate")
      .def_readonly("ex", &IrisEstimate::ex)
      .def_readonly("ey", &IrisEstimate::ey)
      .def_readonly("er", &IrisEstimate::er)
      .def_readonly("l", &IrisEstimate::l)
      .def_readonly("s", &IrisEstimate::s)
      .def_readonly("h", &IrisEstimate::h)
      .def_readonly("c", &IrisEstimate::c)
      .def_readonly("side", &IrisEstimate::side)
      .def("__repr__", [](const IrisEstimate& e) {
        return "IrisEstimate(ex=" + std::to_string(e.ex) + ", ey=" + std::to_string(e.ey) +
               ", er=" + std::to_string(e.er) + ", c=" + std::to_string(e.c) + ")";
      });

  py::class_<PupilEstimate>(m, "PupilEstimate")
      .def_readonly("px", &PupilEstimate::px)
      .def_readonly("py", &PupilEstimate::py)
      .def_readonly("pr", &PupilEstimate::pr)
      .def_readonly("g", &PupilEstimate::g)
      .def_readonly("side", &PupilEstimate::side)
      .def("__repr__", [](const PupilEstimate& e) {
        return "PupilEstimate(px=" + std::to_string(e.px) + ", py=" + std::to_string(e.py) +
               ", pr=" + std::to_string(e.pr) + ", g=" + std::to_string(e.g) + ")";
      });

  m.def("mask_codes", [](int r) {
    const MaskSet mask(r);
    std::vector<std::vector<int>> rows;
    for (int dy = -mask.half_h(); dy <= mask.half_h(); ++dy) {
      auto& row = rows.emplace_back();
      for (int dx = -mask.half_w(); dx <= mask.half_w(); ++dx) row.push_back(mask.code(dx, dy));
    }
    return rows;
  }, py::arg("r"), "Label grid: ring index for iris cells, -1 sclera, 0 skin.");
  m.def("render_mask", [](int r) { return build_mask(r).render(); }, py::arg("r"));

  m.def("score_candidate", [](const Frame& f, int cx, int cy, int r) {
    const CandidateScore s = score_candidate(f, cx, cy, MaskSet(r));
    return py::make_tuple(s.l, s.s, s.h, s.c);
  }, py::arg("frame"), py::arg("cx"), py::arg("cy"), py::arg("r"),
        "(l, s, h, c) for one candidate circle.");

  m.def("detect_iris",
        [](const Frame& f, const EyeRegion& roi, int r_min, int r_max, int stride, int workers) {
          IrisSearchOptions opt;
          opt.r_min = r_min;
          opt.r_max = r_max;
          opt.stride = stride;
          opt.workers = workers;
          py::gil_scoped_release release;
          return detect_iris(f, roi, opt);
        },
        py::arg("frame"), py::arg("roi"), py::arg("r_min") = 0, py::arg("r_max") = 0,
        py::arg("stride") = 1, py::arg("workers") = 1);
  m.def("detect_pupil", &detect_pupil, py::arg("frame"), py::arg("iris"),
        py::arg("neighborhood") = -1);

  m.def("equality_factor", &equality_factor);
  m.def("confidence",
        py::overload_cast<const IrisEstimate&, const IrisEstimate&, const PupilEstimate&,
                          const PupilEstimate&>(&confidence));
  m.def("tolerance_accuracy", [](const std::vector<std::pair<double, double>>& errors, double t) {
    std::vector<RelativeErrors> recs;
    for (const auto& [l, r] : errors) recs.push_back({l, r, (l + r) / 2});
    return tolerance_accuracy(recs, t);
  }, py::arg("errors"), py::arg("tolerance"), "errors: list of (e_l, e_r) pairs.");
  m.def("circle_overlap", [](py::tuple a, py::tuple e, int w, int h) {
    const auto circle = [](py::tuple t) {
      return Circle{t[0].cast<double>(), t[1].cast<double>(), t[2].cast<double>()};
    };
    const AreaOverlap o = circle_overlap(circle(a), circle(e), w, h);
    return py::make_tuple(o.annotated, o.estimated, o.common);
  }, py::arg("annotated"), py::arg("estimated"), py::arg("width"), py::arg("height"),
        "Pixel counts (annotated, estimated, common) for two (cx, cy, r) circles.");
  m.def("pupil_prf", [](std::int64_t a, std::int64_t e, std::int64_t c) {
    const Prf p = pupil_prf(a, e, c);
    return py::make_tuple(p.precision, p.recall, p.f1);
  });

  m.def("synth_eye", [](std::uint64_t seed, const std::string& preset) {
    const SynthEyeSpec spec = random_eye_spec(seed, parse_preset(preset));
    SynthEye eye = synth_eye(spec, seed);
    return py::make_tuple(std::move(eye.frame), eye.iris, eye.pupil, synth_roi(spec, seed));
  }, py::arg("seed"), py::arg("preset") = "clean",
        "Random synthetic eye: (frame, iris truth, pupil truth, eye region).");
}
