#include "vlc/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdlib>
#include <cstring>

namespace vlc::net {

static bool write_all(int fd, const uint8_t* data, size_t len) {
  while (len > 0) {
    ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
    if (n <= 0) return false;
    data += n;
    len -= static_cast<size_t>(n);
  }
  return true;
}

static bool read_all(int fd, uint8_t* data, size_t len) {
  while (len > 0) {
    ssize_t n = ::recv(fd, data, len, 0);
    if (n <= 0) return false;
    data += n;
    len -= static_cast<size_t>(n);
  }
  return true;
}

bool write_frame(int fd, const EntityId& src, const Bytes& payload) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(1 + src.bytes.size() + payload.size()));
  w.var8(std::span<const uint8_t>(src.bytes));
  w.raw(payload);
  return write_all(fd, w.bytes().data(), w.bytes().size());
}

std::optional<std::pair<EntityId, Bytes>> read_frame(int fd) {
  uint8_t head[4];
  if (!read_all(fd, head, 4)) return std::nullopt;
  uint32_t len = uint32_t(head[0]) << 24 | uint32_t(head[1]) << 16 | uint32_t(head[2]) << 8 |
                 uint32_t(head[3]);
  if (len < 2 || len > (64u << 20)) return std::nullopt;
  Bytes body(len);
  if (!read_all(fd, body.data(), len)) return std::nullopt;
  size_t idlen = body[0];
  if (idlen == 0 || 1 + idlen > body.size()) return std::nullopt;
  EntityId src(Bytes(body.begin() + 1, body.begin() + 1 + static_cast<ptrdiff_t>(idlen)));
  Bytes payload(body.begin() + 1 + static_cast<ptrdiff_t>(idlen), body.end());
  return std::make_pair(std::move(src), std::move(payload));
}

static int dial(const Addr& addr, uint64_t recv_timeout_ms) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return -1;
  if (recv_timeout_ms > 0) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(recv_timeout_ms / 1000);
    tv.tv_usec = static_cast<suseconds_t>((recv_timeout_ms % 1000) * 1000);
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(addr.port);
  if (::inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) != 1) {
    ::close(fd);
    return -1;
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    ::close(fd);
    return -1;
  }
  return fd;
}

class RealHost::HostContext final : public sim::Context {
 public:
  HostContext(RealHost* host) : host_(host) {}
  uint64_t now() const override { return host_->now_ms(); }
  const EntityId& self() const override { return host_->self_; }
  const std::vector<EntityId>& roster() const override { return host_->roster_; }
  void send(const EntityId& dst, Bytes payload) override { host_->raw_send(dst, payload); }
  void set_timer(uint64_t delay, uint64_t timer_id) override {
    std::lock_guard lk(host_->timer_mu_);
    host_->timers_.emplace(host_->now_ms() + delay, timer_id);
    host_->timer_cv_.notify_one();
  }
  void log(std::string tag, sim::Json detail) override {
    sim::AppRecord rec{host_->now_ms(), host_->log_seq_++, host_->self_, std::move(tag),
                       std::move(detail)};
    if (std::getenv("CHRONO_LOG") != nullptr) {
      std::string line = rec.tag + " " + rec.detail.dump();
      std::fprintf(stderr, "[%s t=%llu] %s\n", host_->self_.printable().c_str(),
                   static_cast<unsigned long long>(rec.time), line.c_str());
    }
    std::lock_guard lk(host_->log_mu_);
    host_->log_.push_back(std::move(rec));
  }

 private:
  RealHost* host_;
};

RealHost::RealHost(EntityId self, uint16_t listen_port, std::map<EntityId, Addr> peers,
                   sim::Process& proc)
    : self_(std::move(self)), port_(listen_port), peers_(std::move(peers)), proc_(proc) {
  roster_.push_back(self_);
  for (const auto& [id, _] : peers_)
    if (!(id == self_)) roster_.push_back(id);
  std::sort(roster_.begin(), roster_.end());
  start_ = std::chrono::steady_clock::now();
}

RealHost::~RealHost() { stop(); }

uint64_t RealHost::now_ms() const {
  return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - start_)
                                   .count());
}

void RealHost::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  sa.sin_port = htons(port_);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0)
    throw std::runtime_error("bind() failed for " + self_.printable());
  socklen_t slen = sizeof(sa);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &slen);
  port_ = ntohs(sa.sin_port);
  if (::listen(listen_fd_, 64) != 0) throw std::runtime_error("listen() failed");

  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  timer_thread_ = std::thread([this] { timer_loop(); });
  {
    std::lock_guard lk(dispatch_mu_);
    HostContext ctx(this);
    proc_.on_start(ctx);
  }
}

void RealHost::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  timer_cv_.notify_all();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (timer_thread_.joinable()) timer_thread_.join();
  std::vector<int> fds;
  {
    std::lock_guard lk(send_mu_);
    for (auto& [_, fd] : conns_) fds.push_back(fd);
    conns_.clear();
    fds.insert(fds.end(), dead_fds_.begin(), dead_fds_.end());
    dead_fds_.clear();
    for (int fd : accepted_fds_) fds.push_back(fd);
    accepted_fds_.clear();
  }
  for (int fd : fds) ::shutdown(fd, SHUT_RDWR);
  std::vector<std::thread> readers;
  {
    std::lock_guard lk(readers_mu_);
    readers.swap(readers_);
  }
  for (auto& t : readers)
    if (t.joinable()) t.join();
  std::sort(fds.begin(), fds.end());
  fds.erase(std::unique(fds.begin(), fds.end()), fds.end());
  for (int fd : fds) ::close(fd);
}

std::vector<sim::AppRecord> RealHost::snapshot_log() {
  std::lock_guard lk(log_mu_);
  return log_;
}

void RealHost::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      continue;
    }
    {
      std::lock_guard sk(send_mu_);
      accepted_fds_.push_back(fd);
    }
    std::lock_guard lk(readers_mu_);
    readers_.emplace_back([this, fd] { reader_loop(fd); });
  }
}

void RealHost::reader_loop(int fd) {
  while (running_) {
    auto frame = read_frame(fd);
    if (!frame.has_value()) break;
    {
      // replies ride the connection the request came in on
      std::lock_guard lk(send_mu_);
      conns_.try_emplace(frame->first, fd);
    }
    dispatch_message(frame->first, std::move(frame->second));
  }
  // fds are closed once, in stop(); a broken connection just parks here
}

void RealHost::add_peer(const EntityId& id, const Addr& addr) {
  std::lock_guard lk(send_mu_);
  peers_[id] = addr;
  if (std::find(roster_.begin(), roster_.end(), id) == roster_.end()) {
    roster_.push_back(id);
    std::sort(roster_.begin(), roster_.end());
  }
}

void RealHost::timer_loop() {
  std::unique_lock lk(timer_mu_);
  while (running_) {
    if (timers_.empty()) {
      timer_cv_.wait_for(lk, std::chrono::milliseconds(50));
      continue;
    }
    uint64_t deadline = timers_.begin()->first;
    uint64_t current = now_ms();
    if (current < deadline) {
      timer_cv_.wait_for(lk, std::chrono::milliseconds(deadline - current));
      continue;
    }
    uint64_t id = timers_.begin()->second;
    timers_.erase(timers_.begin());
    lk.unlock();
    {
      std::lock_guard dk(dispatch_mu_);
      HostContext ctx(this);
      proc_.on_timer(ctx, id);
    }
    lk.lock();
  }
}

void RealHost::dispatch_message(const EntityId& src, Bytes payload) {
  std::lock_guard lk(dispatch_mu_);
  HostContext ctx(this);
  proc_.on_message(ctx, src, payload);
}

bool RealHost::raw_send(const EntityId& dst, const Bytes& payload) {
  std::lock_guard lk(send_mu_);
  auto it = conns_.find(dst);
  int fd = it == conns_.end() ? -1 : it->second;
  if (fd < 0) {
    auto peer = peers_.find(dst);
    if (peer == peers_.end()) return false;
    fd = dial(peer->second, 0);
    if (fd < 0) return false;
    conns_[dst] = fd;
    // replies to our requests arrive on this connection
    std::lock_guard rk(readers_mu_);
    readers_.emplace_back([this, fd] { reader_loop(fd); });
  }
  if (!write_frame(fd, self_, payload)) {
    ::shutdown(fd, SHUT_RDWR);
    dead_fds_.push_back(fd);
    conns_.erase(dst);
    return false;
  }
  return true;
}

// ---- node wire protocol ----

Bytes encode_prove(uint64_t rid, const ProveRequest& req) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(NodeOp::Prove));
  w.u64(rid);
  write_request(w, req);
  return w.take();
}

Bytes encode_sig(uint64_t rid, const EntityId& node, const crypto::Signature& sig) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(NodeOp::Sig));
  w.u64(rid);
  w.var8(std::span<const uint8_t>(node.bytes));
  w.raw(std::span<const uint8_t>(sig));
  return w.take();
}

Bytes encode_reject(uint64_t rid, Reject code) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(NodeOp::RejectMsg));
  w.u64(rid);
  w.u8(static_cast<uint8_t>(code));
  return w.take();
}

Bytes encode_attest(uint64_t rid, const AttestedDoc& doc) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(NodeOp::Attest));
  w.u64(rid);
  w.var8(std::span<const uint8_t>(doc.signer.bytes));
  w.raw(std::span<const uint8_t>(doc.measurement));
  w.raw(std::span<const uint8_t>(doc.user_data));
  w.raw(std::span<const uint8_t>(doc.sig));
  return w.take();
}

NodeFrame decode_node_frame(std::span<const uint8_t> data) {
  ByteReader r(data);
  uint8_t op = r.u8();
  uint64_t rid = r.u64();
  if (op == static_cast<uint8_t>(NodeOp::Prove)) {
    ProveMsg m{rid, read_request(r)};
    r.expect_done();
    return m;
  }
  if (op == static_cast<uint8_t>(NodeOp::Sig)) {
    SigMsg m;
    m.rid = rid;
    Bytes idb = r.var8();
    if (idb.empty()) throw WireError("empty node id");
    m.node = EntityId(std::move(idb));
    auto raw = r.raw(m.sig.size());
    std::copy(raw.begin(), raw.end(), m.sig.begin());
    r.expect_done();
    return m;
  }
  if (op == static_cast<uint8_t>(NodeOp::RejectMsg)) {
    RejectFrame m{rid, static_cast<Reject>(r.u8())};
    r.expect_done();
    return m;
  }
  if (op == static_cast<uint8_t>(NodeOp::Attest)) {
    AttestMsg m;
    m.rid = rid;
    Bytes idb = r.var8();
    if (idb.empty()) throw WireError("empty signer id");
    m.signer = EntityId(std::move(idb));
    auto mm = r.raw(m.measurement.size());
    std::copy(mm.begin(), mm.end(), m.measurement.begin());
    auto ud = r.raw(m.user_data.size());
    std::copy(ud.begin(), ud.end(), m.user_data.begin());
    auto sg = r.raw(m.sig.size());
    std::copy(sg.begin(), sg.end(), m.sig.begin());
    r.expect_done();
    return m;
  }
  throw WireError("unknown node op");
}

void QuorumNodeProcess::on_message(sim::Context& ctx, const EntityId& src, const Bytes& raw) {
  NodeFrame frame;
  try {
    frame = decode_node_frame(raw);
  } catch (const WireError&) {
    return;
  }
  const auto* prove = std::get_if<ProveMsg>(&frame);
  if (prove == nullptr) return;
  auto reply = node_->prove(prove->req, dep_);
  if (!reply.has_value()) return;  // silent fault mode
  if (reply->ok()) {
    ctx.send(src, encode_sig(prove->rid, node_->id(), reply->value().sig));
  } else {
    ctx.send(src, encode_reject(prove->rid, reply->code()));
  }
}

void AttestedNodeProcess::on_message(sim::Context& ctx, const EntityId& src, const Bytes& raw) {
  NodeFrame frame;
  try {
    frame = decode_node_frame(raw);
  } catch (const WireError&) {
    return;
  }
  const auto* prove = std::get_if<ProveMsg>(&frame);
  if (prove == nullptr) return;
  auto reply = signer_->prove(prove->req, dep_);
  if (!reply.has_value()) return;
  if (reply->ok()) {
    ctx.send(src, encode_attest(prove->rid, reply->value()));
  } else {
    ctx.send(src, encode_reject(prove->rid, reply->code()));
  }
}

NetProofClient::NetProofClient(Deployment dep, EntityId self, std::map<EntityId, Addr> nodes,
                               uint64_t timeout_ms)
    : dep_(std::move(dep)), self_(std::move(self)), nodes_(std::move(nodes)),
      timeout_ms_(timeout_ms) {}

NetProofClient::~NetProofClient() {
  for (auto& [_, fd] : conns_) ::close(fd);
}

int NetProofClient::conn(const EntityId& node) {
  auto it = conns_.find(node);
  if (it != conns_.end()) return it->second;
  auto addr = nodes_.find(node);
  if (addr == nodes_.end()) return -1;
  int fd = dial(addr->second, timeout_ms_);
  if (fd >= 0) conns_[node] = fd;
  return fd;
}

void NetProofClient::drop_conn(const EntityId& node) {
  auto it = conns_.find(node);
  if (it != conns_.end()) {
    ::close(it->second);
    conns_.erase(it);
  }
}

Result<Vlc> NetProofClient::prove(const SignedUpdate& update) {
  Vlc out;
  bool first = true;
  const auto& registry = dep_.backend == BackendKind::Quorum
                             ? dep_.quorum.registry
                             : dep_.attested.roots;
  std::vector<EntityId> order;
  for (const auto& [id, _] : registry) order.push_back(id);

  for (FrontendKind kind : {FrontendKind::Update, FrontendKind::App, FrontendKind::Mono}) {
    auto rit = update.requests.find(kind);
    if (rit == update.requests.end()) continue;
    const ProveRequest& req = rit->second;
    const ClockValue expected = request_output(req);
    const Bytes expected_bytes = serialize(expected);
    const auto value_hash = crypto::sha256(expected_bytes);
    const uint32_t t = dep_.backend == BackendKind::Quorum ? dep_.quorum.threshold(kind)
                                                           : dep_.attested.threshold(kind);

    std::map<EntityId, crypto::Signature> sigs;
    std::map<Reject, uint32_t> rejections;
    size_t contacted = 0;
    size_t target = std::min<size_t>(t, order.size());
    while (sigs.size() < t) {
      for (; contacted < target; ++contacted) {
        const EntityId& node = order[contacted];
        int fd = conn(node);
        if (fd < 0) continue;
        uint64_t rid = next_rid_++;
        if (!write_frame(fd, self_, encode_prove(rid, req))) {
          drop_conn(node);
          continue;
        }
        auto frame = read_frame(fd);  // bounded by SO_RCVTIMEO
        if (!frame.has_value()) {
          drop_conn(node);
          continue;
        }
        NodeFrame nf;
        try {
          nf = decode_node_frame(frame->second);
        } catch (const WireError&) {
          continue;
        }
        if (const auto* sig = std::get_if<SigMsg>(&nf)) {
          if (sig->rid != rid) {
            drop_conn(node);  // stale reply from a timed-out round: resync
            continue;
          }
          if (!(sig->node == node)) continue;
          auto key = dep_.quorum.registry.find(node);
          if (key == dep_.quorum.registry.end()) continue;
          if (!crypto::verify(qc_sign_payload(kind, expected), sig->sig, key->second)) continue;
          sigs.emplace(node, sig->sig);
        } else if (const auto* at = std::get_if<AttestMsg>(&nf)) {
          if (at->rid != rid) {
            drop_conn(node);
            continue;
          }
          if (!(at->signer == node)) continue;
          if (at->measurement != dep_.attested.expected_measurement) continue;
          if (at->user_data != value_hash) continue;
          auto key = dep_.attested.roots.find(node);
          if (key == dep_.attested.roots.end()) continue;
          if (!crypto::verify(attest_sign_payload(kind, at->measurement, at->user_data), at->sig,
                              key->second))
            continue;
          sigs.emplace(node, at->sig);
        } else if (const auto* rej = std::get_if<RejectFrame>(&nf)) {
          if (rej->rid == rid) rejections[rej->code]++;
        }
      }
      if (sigs.size() >= t) break;
      if (target >= order.size()) {
        if (!rejections.empty()) {
          auto best = std::max_element(
              rejections.begin(), rejections.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
          return Rejection{best->first, "validator nodes rejected the request"};
        }
        return Rejection{Reject::InsufficientQuorum, "not enough matching node replies"};
      }
      ++target;
    }

    Proof proof;
    if (dep_.backend == BackendKind::Quorum) {
      QuorumCert cert;
      cert.kind = kind;
      cert.value_hash = value_hash;
      cert.sigs = std::move(sigs);
      proof = std::move(cert);
    } else {
      AttestedCert cert;
      cert.kind = kind;
      cert.measurement = dep_.attested.expected_measurement;
      cert.user_data = value_hash;
      cert.sigs = std::move(sigs);
      proof = std::move(cert);
    }
    if (first) {
      out.value = expected;
      first = false;
    }
    out.proofs.emplace(kind, std::move(proof));
  }
  return out;
}

}  // namespace vlc::net
