#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>

#include "bbinit/core.hpp"
#include "bbinit/errors.hpp"
#include "bbinit/eval.hpp"
#include "bbinit/features.hpp"
#include "bbinit/lbdm.hpp"
#include "bbinit/superpixel.hpp"

namespace py = pybind11;
using namespace bbinit;
using nlohmann::json;

namespace {

Image image_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(2) != 3)
        throw InvalidInput("Image array must have shape (H, W, 3)");
    Image img;
    img.height = static_cast<int>(a.shape(0));
    img.width = static_cast<int>(a.shape(1));
    img.pixels.resize(img.pixel_count());
    const std::uint8_t* src = a.data();
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = {src[3 * i], src[3 * i + 1], src[3 * i + 2]};
    return img;
}

BinaryMask mask_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw InvalidInput("Mask array must have shape (H, W)");
    BinaryMask mask;
    mask.height = static_cast<int>(a.shape(0));
    mask.width = static_cast<int>(a.shape(1));
    mask.labels.resize(static_cast<std::size_t>(mask.width) * mask.height);
    const std::uint8_t* src = a.data();
    for (std::size_t i = 0; i < mask.labels.size(); ++i) mask.labels[i] = src[i] ? 1 : 0;
    return mask;
}

py::array_t<std::uint8_t> mask_to_array(const BinaryMask& mask) {
    py::array_t<std::uint8_t> out({mask.height, mask.width});
    std::uint8_t* dst = out.mutable_data();
    for (std::size_t i = 0; i < mask.labels.size(); ++i) dst[i] = mask.labels[i];
    return out;
}

BoundingBox bbox_from_tuple(const py::tuple& t) {
    if (t.size() != 4) throw InvalidInput("Bounding box must be a (x, y, w, h) 4-tuple");
    return {t[0].cast<double>(), t[1].cast<double>(), t[2].cast<double>(), t[3].cast<double>()};
}

json params_from_dict(const py::dict& d) {
    json params = json::object();
    for (auto item : d) {
        std::string key = item.first.cast<std::string>();
        if (py::isinstance<py::str>(item.second))
            params[key] = item.second.cast<std::string>();
        else if (py::isinstance<py::bool_>(item.second))
            params[key] = item.second.cast<bool>();
        else if (py::isinstance<py::int_>(item.second))
            params[key] = item.second.cast<long long>();
        else
            params[key] = item.second.cast<double>();
    }
    return params;
}

}  // namespace

PYBIND11_MODULE(_bbinit, m) {
    m.doc() = "Bounding-box object segmentation for tracker initialisation";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<InsufficientBackground>(m, "InsufficientBackground",
                                                   PyExc_RuntimeError);
    py::register_exception<DegenerateScribble>(m, "DegenerateScribble", PyExc_RuntimeError);
    py::register_exception<LoadError>(m, "LoadError", PyExc_IOError);

    m.def(
        "segment",
        [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> image,
           py::tuple bbox, const std::string& method, py::dict params, std::uint64_t seed) {
            Image frame = image_from_array(image);
            BinaryMask mask = run_method(frame, bbox_from_tuple(bbox),
                                         method_from_string(method), params_from_dict(params),
                                         seed);
            return mask_to_array(mask);
        },
        py::arg("image"), py::arg("bbox"), py::arg("method"), py::arg("params") = py::dict(),
        py::arg("seed") = 0,
        "Segment the object inside `bbox` and return a full-frame uint8 mask.");

    m.def(
        "slic0",
        [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> image,
           int n_target, int max_iters) {
            Image img = image_from_array(image);
            if (n_target <= 0) n_target = target_superpixel_count(img.pixel_count());
            SuperpixelMap map = slic0_segment(img, n_target, max_iters);
            py::array_t<std::int32_t> out({img.height, img.width});
            std::int32_t* dst = out.mutable_data();
            for (std::size_t i = 0; i < map.labels.size(); ++i) dst[i] = map.labels[i];
            return out;
        },
        py::arg("image"), py::arg("n_target") = 0, py::arg("max_iters") = 10,
        "SLIC0 superpixel labels as an int32 (H, W) array.");

    m.def(
        "matte",
        [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> image,
           py::tuple bbox, py::dict params) {
            json p = params_from_dict(params);
            validate_params(Method::Lbdm, p);
            LbdmConfig cfg;
            auto get = [&p](const char* key, double fallback) {
                return p.contains(key) ? p.at(key).get<double>() : fallback;
            };
            cfg.rho_minus = get("rho_minus", cfg.rho_minus);
            cfg.rho_plus = get("rho_plus", cfg.rho_plus);
            cfg.tau = get("tau", cfg.tau);
            cfg.lambda = get("lambda", cfg.lambda);
            cfg.c = get("c", cfg.c);
            cfg.window = static_cast<int>(get("window", cfg.window));
            cfg.cg_tol = get("cg_tol", cfg.cg_tol);
            cfg.cg_max_iters = static_cast<int>(get("cg_max_iters", cfg.cg_max_iters));
            CroppedScene scene;
            AlphaMatte matte =
                lbdm_matte(image_from_array(image), bbox_from_tuple(bbox), cfg, &scene);
            py::array_t<double> out({matte.height, matte.width});
            double* dst = out.mutable_data();
            for (Eigen::Index i = 0; i < matte.alpha.size(); ++i) dst[i] = matte.alpha[i];
            return py::make_tuple(out, py::make_tuple(scene.x0, scene.y0));
        },
        py::arg("image"), py::arg("bbox"), py::arg("params") = py::dict(),
        "Laplacian matte over the context crop: (alpha (h, w) float array, (x0, y0) origin).");

    m.def(
        "iou",
        [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> g,
           py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> p) {
            return iou(mask_from_array(g), mask_from_array(p));
        },
        py::arg("gt"), py::arg("pred"), "Jaccard index of two (H, W) uint8 masks.");

    m.def(
        "iou_bb",
        [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> g,
           py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> p,
           py::tuple bbox) {
            BinaryMask G = mask_from_array(g);
            BinaryMask B = rasterize_bbox(bbox_from_tuple(bbox), G.width, G.height);
            return iou_bb(G, mask_from_array(p), B);
        },
        py::arg("gt"), py::arg("pred"), py::arg("bbox"),
        "Jaccard index restricted to the rasterised bounding box.");

    m.def("dsc_from_iou", &dsc_from_iou, py::arg("phi"),
          "Dice coefficient 2*phi / (1 + phi).");

    m.def(
        "srgb_to_lab",
        [](int r, int g, int b) {
            auto lab = srgb_to_lab(Rgb{static_cast<std::uint8_t>(r),
                                       static_cast<std::uint8_t>(g),
                                       static_cast<std::uint8_t>(b)});
            return py::make_tuple(lab[0], lab[1], lab[2]);
        },
        py::arg("r"), py::arg("g"), py::arg("b"), "CIE Lab (D65) from 8-bit sRGB.");

    m.def(
        "parse_region", [](const std::string& line) {
            BoundingBox b = parse_region(line);
            return py::make_tuple(b.x, b.y, b.w, b.h);
        },
        py::arg("line"),
        "Parse a 4-number box or 8-number polygon region line into (x, y, w, h).");
}
