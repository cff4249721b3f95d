import numpy as np
import pytest

from fabricsim import (
    PixelImage,
    canny_reference,
    conv2d_reference,
    latency_of,
    make_gaussian_5x5,
    make_streaming,
)
from fabricsim.errors import BusyError, DimensionMismatchError
from fabricsim.streaming import TokenSink, TokenSource
from fabricsim.switch import CONSUMER, PRODUCER, StreamSwitch


def stream_frame(kernel, img: PixelImage, ready_after=0, max_cycles=None):
    """Push one frame through a lone kernel; returns (sink, stats)."""
    kernel.configure(img.width, img.height)
    sw = StreamSwitch()
    src = TokenSource(img.samples.reshape(-1).tolist())
    sink = TokenSink(ready_after=ready_after)
    p_src = sw.attach_port(src, PRODUCER)
    p_kin = sw.attach_port(kernel, CONSUMER)
    p_kout = sw.attach_port(kernel, PRODUCER)
    p_sink = sw.attach_port(sink, CONSUMER)
    sw.configure_route(p_src, p_kin)
    sw.configure_route(p_kout, p_sink)
    if max_cycles is None:
        max_cycles = 16 * img.width * img.height + 4000
    stats = sw.run_frame(max_cycles)
    return sink, stats


def test_streaming_conv_constant():
    img = PixelImage.constant(12, 9, 100)
    sink, _ = stream_frame(make_streaming("conv"), img)
    assert sink.tokens == [100] * (12 * 9)


def test_streaming_conv_equals_reference(rng):
    k = make_gaussian_5x5()
    for _ in range(8):
        h = int(rng.integers(5, 33))
        w = int(rng.integers(5, 33))
        img = PixelImage.from_array(rng.integers(0, 256, (h, w), dtype=np.uint8))
        sink, _ = stream_frame(make_streaming("conv"), img)
        assert sink.tokens == conv2d_reference(img, k).samples.reshape(-1).tolist()


def test_streaming_canny_equals_reference_on_step():
    a = np.zeros((16, 16), dtype=np.uint8)
    a[:, 8:] = 255
    img = PixelImage.from_array(a)
    sink, _ = stream_frame(make_streaming("canny"), img)
    assert sink.tokens == canny_reference(img, 128).values.reshape(-1).tolist()


def test_streaming_canny_equals_reference_random(rng):
    for _ in range(6):
        h = int(rng.integers(3, 28))
        w = int(rng.integers(3, 28))
        img = PixelImage.from_array(rng.integers(0, 256, (h, w), dtype=np.uint8))
        sink, _ = stream_frame(make_streaming("canny"), img)
        assert sink.tokens == canny_reference(img, 128).values.reshape(-1).tolist()


@pytest.mark.parametrize("kind,width", [("conv", 16), ("conv", 33), ("canny", 16), ("identity", 8)])
def test_first_output_cycle_matches_latency(kind, width):
    img = PixelImage.constant(width, 8, 77)
    kernel = make_streaming(kind)
    sink, _ = stream_frame(kernel, img)
    assert sink.arrival_cycles[0] == latency_of(kind, width) + 1


def test_steady_state_one_token_per_cycle():
    img = PixelImage.constant(20, 12, 50)
    sink, stats = stream_frame(make_streaming("conv"), img)
    diffs = np.diff(sink.arrival_cycles)
    assert np.all(diffs == 1)
    assert stats.cycles_elapsed == 20 * 12 + latency_of("conv", 20)


def test_total_frame_cycles_conv_canny_chain():
    h, w = 24, 40
    img_tokens = list(range(256)) * ((w * h) // 256 + 1)
    conv = make_streaming("conv")
    conv.configure(w, h)
    canny = make_streaming("canny")
    canny.configure(w, h)
    sw = StreamSwitch()
    src = TokenSource([t & 0xFF for t in img_tokens[: w * h]])
    sink = TokenSink()
    p_src = sw.attach_port(src, PRODUCER)
    ci = sw.attach_port(conv, CONSUMER)
    co = sw.attach_port(conv, PRODUCER)
    ni = sw.attach_port(canny, CONSUMER)
    no = sw.attach_port(canny, PRODUCER)
    p_sink = sw.attach_port(sink, CONSUMER)
    sw.configure_route(p_src, ci)
    sw.configure_route(co, ni)
    sw.configure_route(no, p_sink)
    stats = sw.run_frame(100_000)
    assert stats.cycles_elapsed == w * h + latency_of("conv", w) + latency_of("canny", w)
    assert len(sink.tokens) == w * h


def test_backpressure_does_not_corrupt_stream(rng):
    img = PixelImage.from_array(rng.integers(0, 256, (10, 14), dtype=np.uint8))
    ref = conv2d_reference(img, make_gaussian_5x5()).samples.reshape(-1).tolist()
    sink, stats = stream_frame(make_streaming("conv"), img, ready_after=200)
    assert sink.tokens == ref
    assert sum(stats.stall_cycles.values()) > 0


def test_dimension_mismatch_too_few_tokens():
    kernel = make_streaming("identity")
    kernel.configure(4, 4)
    sw = StreamSwitch()
    src = TokenSource(list(range(12)))  # last token arrives early
    sink = TokenSink()
    p = sw.attach_port(src, PRODUCER)
    ki = sw.attach_port(kernel, CONSUMER)
    ko = sw.attach_port(kernel, PRODUCER)
    s = sw.attach_port(sink, CONSUMER)
    sw.configure_route(p, ki)
    sw.configure_route(ko, s)
    with pytest.raises(DimensionMismatchError):
        sw.run_frame(1000)


def test_dimension_mismatch_too_many_tokens():
    kernel = make_streaming("identity")
    kernel.configure(4, 4)
    sw = StreamSwitch()
    src = TokenSource(list(range(20)))  # frame boundary never flagged at 16
    sink = TokenSink()
    p = sw.attach_port(src, PRODUCER)
    ki = sw.attach_port(kernel, CONSUMER)
    ko = sw.attach_port(kernel, PRODUCER)
    s = sw.attach_port(sink, CONSUMER)
    sw.configure_route(p, ki)
    sw.configure_route(ko, s)
    with pytest.raises(DimensionMismatchError):
        sw.run_frame(1000)


def test_reconfigure_mid_frame_rejected():
    kernel = make_streaming("conv")
    kernel.configure(8, 8)
    kernel.rx_push(1, False)
    with pytest.raises(BusyError):
        kernel.configure(8, 8)


def test_configure_requires_minimum_window():
    kernel = make_streaming("conv")
    with pytest.raises(ValueError):
        kernel.configure(4, 8)


def test_back_to_back_frames_rearm():
    img1 = PixelImage.constant(8, 8, 10)
    img2 = PixelImage.constant(8, 8, 200)
    kernel = make_streaming("conv")
    kernel.configure(8, 8)
    sw = StreamSwitch()
    sink = TokenSink()
    src1 = TokenSource(img1.samples.reshape(-1).tolist())
    p1 = sw.attach_port(src1, PRODUCER)
    ki = sw.attach_port(kernel, CONSUMER)
    ko = sw.attach_port(kernel, PRODUCER)
    s = sw.attach_port(sink, CONSUMER)
    sw.configure_route(p1, ki)
    sw.configure_route(ko, s)
    sw.run_frame(10_000)
    assert sink.tokens == [10] * 64
    assert kernel.frames_completed == 1
    # second frame through the same kernel without reconfiguring
    sink.reset_stream()
    src2 = TokenSource(img2.samples.reshape(-1).tolist())
    sw.unroute(ki)
    p2 = sw.attach_port(src2, PRODUCER)
    sw.configure_route(p2, ki)
    sw.run_frame(10_000)
    assert sink.tokens == [200] * 64
    assert kernel.frames_completed == 2
