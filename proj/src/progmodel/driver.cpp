// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/progmodel/driver.hpp"

namespace pie::progmodel {

namespace {

using peripherals::Frame;
using peripherals::FrameType;

Error bad_op(std::string_view kind) {
  return make_error(Errc::InvalidArgument,
                    "unsupported request for " + std::string(kind));
}

// Sends one Data frame and returns what the device sends back.
Result<Bytes> frame_round_trip(DriverContext& ctx, ByteView data) {
  auto frame = Frame::make(FrameType::Data, 0, data);
  if (!frame) return frame.error();
  Status s = ctx.bus.send_frame(ctx.controller, ctx.device->id(), *frame);
  if (!s) return s.error();
  auto back = ctx.bus.recv_frame(ctx.controller, ctx.device->id());
  if (!back) return back.error();
  if (!*back) return Bytes{};
  ByteView p = (*back)->payload();
  return Bytes(p.begin(), p.end());
}

template <typename T>
Result<T*> device_as(DriverContext& ctx) {
  auto* d = dynamic_cast<T*>(ctx.device);
  if (!d) return make_error(Errc::NotConnected, "driver has no device");
  return d;
}

class SensorDriver final : public Driver {
 public:
  std::string_view kind() const override { return "sensor"; }
  bool exclusive() const override { return true; }

  Result<Bytes> handle(DriverContext& ctx, ByteView req) override {
    auto dev = device_as<peripherals::Sensor>(ctx);
    if (!dev) return dev.error();
    if (req.empty()) return bad_op(kind());
    switch (static_cast<Op>(req[0])) {
      case Op::Read: {
        auto st = (*dev)->sensor_read();
        Bytes out;
        put_be16(out, static_cast<std::uint16_t>(st.value));
        put_be64(out, st.counter);
        append(out, st.signature);
        return out;
      }
      case Op::Frame:
        return frame_round_trip(ctx, req.subspan(1));
      default:
        return bad_op(kind());
    }
  }
};

class KeyboardDriver final : public Driver {
 public:
  std::string_view kind() const override { return "keyboard"; }
  bool exclusive() const override { return true; }

  Result<Bytes> handle(DriverContext& ctx, ByteView req) override {
    auto dev = device_as<peripherals::Keyboard>(ctx);
    if (!dev) return dev.error();
    if (req.empty()) return bad_op(kind());
    switch (static_cast<Op>(req[0])) {
      case Op::Read: {
        auto key = (*dev)->keyboard_poll();
        if (!key) return Bytes{0};
        return Bytes{1, *key};
      }
      case Op::Frame:
        return frame_round_trip(ctx, req.subspan(1));
      default:
        return bad_op(kind());
    }
  }
};

class AcceleratorDriver final : public Driver {
 public:
  std::string_view kind() const override { return "accelerator"; }

  void open_session(DriverContext& ctx) override {
    if (auto dev = device_as<peripherals::Accelerator>(ctx))
      (*dev)->accel_open_session(ctx.ae);
  }
  void close_session(DriverContext& ctx) override {
    if (auto dev = device_as<peripherals::Accelerator>(ctx))
      (*dev)->accel_reset(ctx.ae);
  }

  Result<Bytes> handle(DriverContext& ctx, ByteView req) override {
    auto dev = device_as<peripherals::Accelerator>(ctx);
    if (!dev) return dev.error();
    if (req.empty()) return bad_op(kind());
    switch (static_cast<Op>(req[0])) {
      case Op::Submit: {
        Status s = (*dev)->accel_submit(ctx.ae, req.subspan(1));
        if (!s) return s.error();
        return Bytes{};
      }
      case Op::Result:
        return (*dev)->accel_result(ctx.ae);
      case Op::Frame:
        return frame_round_trip(ctx, req.subspan(1));
      default:
        return bad_op(kind());
    }
  }
};

class EchoDriver final : public Driver {
 public:
  std::string_view kind() const override { return "echo"; }
  bool touches_peripheral() const override { return false; }

  Result<Bytes> handle(DriverContext&, ByteView req) override {
    return Bytes(req.begin(), req.end());
  }
};

}  // namespace

DriverRegistry DriverRegistry::with_builtins() {
  DriverRegistry r;
  r.add("sensor", [] { return std::make_unique<SensorDriver>(); });
  r.add("keyboard", [] { return std::make_unique<KeyboardDriver>(); });
  r.add("accelerator", [] { return std::make_unique<AcceleratorDriver>(); });
  r.add("echo", [] { return std::make_unique<EchoDriver>(); });
  return r;
}

void DriverRegistry::add(std::string kind, DriverFactory factory) {
  factories_[std::move(kind)] = std::move(factory);
}

bool DriverRegistry::has(std::string_view kind) const {
  return factories_.find(kind) != factories_.end();
}

std::unique_ptr<Driver> DriverRegistry::make(std::string_view kind) const {
  auto it = factories_.find(kind);
  if (it == factories_.end()) return nullptr;
  return it->second();
}

}  // namespace pie::progmodel
