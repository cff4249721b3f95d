import json

import numpy as np
import pytest

from fabricsim import (
    PixelImage,
    bundled_overlay,
    canny_reference,
    conv2d_reference,
    describe,
    load_overlay,
    make_gaussian_5x5,
    parse_descriptor,
    reconfigure_route,
    save_descriptor,
)
from fabricsim.errors import (
    BusyError,
    DescriptorParseError,
    DescriptorValidationError,
    RangeError,
    UnknownEndpointError,
)
from fabricsim.overlay import K_HEIGHT, K_WIDTH, LoadedOverlay, OverlayDescriptor
from fabricsim.switch import UNROUTED


def edge_descriptor_dict():
    with open(bundled_overlay("edge_detect")) as f:
        return json.load(f)


def test_load_edge_detect_overlay():
    ov = load_overlay(bundled_overlay("edge_detect"))
    assert ov.descriptor.fabric_clock_hz == 200e6
    assert [k.kind for k in ov.descriptor.kernels] == ["conv", "canny"]
    assert len(ov.channels) == 2
    assert ov.routes_by_name() == [
        ("dma_in", "gaussian"),
        ("gaussian", "edge"),
        ("edge", "dma_out"),
    ]


def test_validation_same_register_base(tmp_path):
    data = edge_descriptor_dict()
    data["kernels"][1]["register_base"] = data["kernels"][0]["register_base"]
    with pytest.raises(DescriptorValidationError):
        OverlayDescriptor.from_dict(data)


def test_validation_dangling_route():
    data = edge_descriptor_dict()
    data["default_routes"].append(["gaussian", "nonexistent"])
    with pytest.raises(DescriptorValidationError):
        OverlayDescriptor.from_dict(data)


def test_validation_unknown_field():
    data = edge_descriptor_dict()
    data["bitstream"] = "firmware.bit"
    with pytest.raises(DescriptorValidationError):
        OverlayDescriptor.from_dict(data)


def test_validation_bad_version():
    data = edge_descriptor_dict()
    data["version"] = 99
    with pytest.raises(DescriptorValidationError):
        OverlayDescriptor.from_dict(data)


def test_validation_bad_kind():
    data = edge_descriptor_dict()
    data["kernels"][0]["kind"] = "fft"
    with pytest.raises(DescriptorValidationError):
        OverlayDescriptor.from_dict(data)


def test_validation_too_few_ports():
    data = edge_descriptor_dict()
    data["switch"]["ports"] = 3
    with pytest.raises(DescriptorValidationError):
        OverlayDescriptor.from_dict(data)


def test_parse_error_has_position():
    with pytest.raises(DescriptorParseError) as exc:
        parse_descriptor("{ not json }")
    assert "line 1" in str(exc.value)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        load_overlay(tmp_path / "nope.json")


def test_describe_round_trip(tmp_path):
    ov = load_overlay(bundled_overlay("edge_detect"))
    summary = describe(ov)
    path = tmp_path / "written.json"
    save_descriptor(ov.descriptor, path)
    again = load_overlay(path)
    assert again.descriptor == ov.descriptor
    assert describe(again) == summary


def test_empty_overlay_is_valid():
    desc = OverlayDescriptor.from_dict(
        {
            "format": "fabricsim-overlay",
            "version": 1,
            "name": "empty",
            "fabric_clock_hz": 200e6,
            "switch": {"ports": 4, "register_base": "0x1000"},
        }
    )
    ov = LoadedOverlay(desc)
    assert ov.kernels == {}
    assert ov.channels == {}
    assert ov.describe()["kernels"] == []


def test_load_determinism():
    a = load_overlay(bundled_overlay("edge_detect"))
    b = load_overlay(bundled_overlay("edge_detect"))
    assert a.register_snapshot() == b.register_snapshot()
    assert a.describe() == b.describe()


def test_reconfigure_bypass_canny(rng):
    ov = load_overlay(bundled_overlay("edge_detect"))
    reconfigure_route(ov, "gaussian", "dma_out")
    img = PixelImage.from_array(rng.integers(0, 256, (16, 24), dtype=np.uint8))
    blur, _ = ov.run_pipeline(img, as_edges=False)
    ref = conv2d_reference(img, make_gaussian_5x5())
    assert blur == ref


def test_reconfigure_unknown_endpoint():
    ov = load_overlay(bundled_overlay("edge_detect"))
    with pytest.raises(UnknownEndpointError):
        reconfigure_route(ov, "gaussian", "wat")
    with pytest.raises(UnknownEndpointError):
        reconfigure_route(ov, "dma_out", "gaussian")  # dma_out has no producer side


def test_reconfigure_mid_frame_busy(rng):
    ov = load_overlay(bundled_overlay("edge_detect"))
    img = PixelImage.from_array(rng.integers(0, 256, (8, 8), dtype=np.uint8))
    ov.configure_frame(8, 8)
    in_ch = ov.channels["dma_in"]
    t = in_ch.transfer(img.tobytes())
    for _ in range(10):
        ov.switch.step()
    with pytest.raises(BusyError):
        reconfigure_route(ov, "gaussian", "dma_out")
    out = ov.channels["dma_out"].transfer(bytearray(64))
    ov.channels["dma_out"].wait(out)
    in_ch.wait(t)


def test_mmio_equivalence_of_named_reroute():
    base = bundled_overlay("edge_detect")
    a = load_overlay(base)
    b = load_overlay(base)
    a.reconfigure_route("gaussian", "dma_out")
    # raw register writes: clear canny-in's select, then point dma_out at
    # gaussian's output port
    sw_base = b.descriptor.switch.register_base
    gaussian_out = b.kernel_ports["gaussian"][1]
    edge_in = b.kernel_ports["edge"][0]
    dma_out_port = b.dma_ports["dma_out"]
    b.mmio_write(sw_base + 4 * edge_in, UNROUTED)
    b.mmio_write(sw_base + 4 * dma_out_port, gaussian_out)
    assert a.register_snapshot() == b.register_snapshot()
    assert a.switch.routes == b.switch.routes


def test_route_register_replacement_semantics():
    ov = load_overlay(bundled_overlay("edge_detect"))
    sw_base = ov.descriptor.switch.register_base
    gaussian_in = ov.kernel_ports["gaussian"][0]
    # replace the driver of gaussian-in without unrouting first: mux select
    dma_in_port = ov.dma_ports["dma_in"]
    assert ov.switch.producer_of(gaussian_in) == dma_in_port
    ov.mmio_write(sw_base + 4 * gaussian_in, UNROUTED)
    assert ov.switch.producer_of(gaussian_in) == UNROUTED
    ov.mmio_write(sw_base + 4 * gaussian_in, dma_in_port)
    assert ov.switch.producer_of(gaussian_in) == dma_in_port


def test_kernel_register_write_configures():
    ov = load_overlay(bundled_overlay("edge_detect"))
    base = ov.descriptor.kernels[0].register_base
    ov.mmio_write(base + K_WIDTH, 32)
    assert not ov.kernels["gaussian"].configured
    ov.mmio_write(base + K_HEIGHT, 16)
    kern = ov.kernels["gaussian"]
    assert kern.configured and kern.width == 32 and kern.height == 16


def test_mmio_unmapped_address():
    ov = load_overlay(bundled_overlay("edge_detect"))
    with pytest.raises(RangeError):
        ov.mmio_read(0x1000_0000)
    with pytest.raises(RangeError):
        ov.mmio_write(0x1000_0000, 1)


def test_pipeline_output_matches_golden(rng, edge_overlay):
    img = PixelImage.from_array(rng.integers(0, 256, (20, 28), dtype=np.uint8))
    edges, run = edge_overlay.run_pipeline(img)
    golden = canny_reference(conv2d_reference(img, make_gaussian_5x5()), 128)
    assert edges == golden
    assert run.cycles == run.stats.cycles_elapsed
    assert run.simulated_seconds > 0


def test_pipeline_threshold_override(rng, edge_overlay):
    img = PixelImage.from_array(rng.integers(0, 256, (16, 16), dtype=np.uint8))
    edges64, _ = edge_overlay.run_pipeline(img, threshold=64)
    golden = canny_reference(conv2d_reference(img, make_gaussian_5x5()), 64)
    assert edges64 == golden
