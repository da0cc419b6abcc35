import threading
import time

import pytest
from hypothesis import given, settings, strategies as st

from clauseviz.model import EventKind
from clauseviz.wire import (ConsumerServer, MessageKind, OversizedClause,
                            StreamDecoder, TruncatedVarint, UnknownTag,
                            WireMessage, decode_all, encode_clause_message,
                            encode_hello, encode_literal, encode_message,
                            encode_terminate, encode_varint, producer_session)

nonzero_lits = st.integers(min_value=-10**6, max_value=10**6).filter(lambda x: x != 0)


def test_encode_literal_examples():
    assert encode_literal(3) == bytes([0x06])
    assert encode_literal(-3) == bytes([0x07])
    # u = 200 = 0b11001000 -> low seven bits 0x48 | 0x80, remainder 1
    assert encode_literal(100) == bytes([0xC8, 0x01])


def test_varint_boundaries():
    assert encode_varint(0) == b"\x00"
    assert encode_varint(127) == b"\x7f"
    assert encode_varint(128) == b"\x80\x01"


def test_decode_examples():
    msgs = decode_all(bytes([0x01, 0x06, 0x07, 0x00]))
    assert msgs == [WireMessage(MessageKind.ADD, literals=(3, -3))]
    assert decode_all(bytes([0x03])) == [WireMessage(MessageKind.TERMINATE)]
    assert decode_all(bytes([0x01, 0x00])) == [
        WireMessage(MessageKind.ADD, literals=())]


def test_hello_round_trip():
    msgs = decode_all(encode_hello(num_variables=512))
    assert msgs[0].kind is MessageKind.HELLO
    assert msgs[0].version == 1
    assert msgs[0].num_variables == 512


def test_unknown_tag_and_truncation():
    with pytest.raises(UnknownTag):
        decode_all(b"\x7e")
    with pytest.raises(TruncatedVarint):
        decode_all(bytes([0x01, 0xC8]))  # continuation bit, stream ends


def test_oversized_clause():
    data = bytes([0x01]) + encode_literal(1) * 10
    with pytest.raises(OversizedClause):
        decode_all(data, max_clause_literals=5)


@settings(max_examples=200)
@given(st.lists(nonzero_lits, max_size=30),
       st.sampled_from([EventKind.ADD, EventKind.DELETE]))
def test_codec_round_trip(lits, kind):
    data = encode_clause_message(kind, lits)
    msgs = decode_all(data)
    assert len(msgs) == 1
    expect = MessageKind.ADD if kind is EventKind.ADD else MessageKind.DELETE
    assert msgs[0].kind is expect
    assert msgs[0].literals == tuple(lits)


@settings(max_examples=100)
@given(st.lists(st.lists(nonzero_lits, max_size=8), max_size=8),
       st.integers(min_value=1, max_value=40))
def test_prefix_decodes_to_complete_messages(clauses, cut):
    stream = encode_hello(5)
    for lits in clauses:
        stream += encode_clause_message(EventKind.ADD, lits)
    stream += encode_terminate()
    whole = decode_all(stream)
    dec = StreamDecoder()
    got = dec.feed(stream[:cut])
    # every decoded prefix message equals the corresponding full-stream one
    assert got == whole[:len(got)]
    got += dec.feed(stream[cut:])
    dec.finish()
    assert got == whole


def test_feed_byte_at_a_time():
    stream = (encode_hello(0)
              + encode_clause_message(EventKind.ADD, (100, -200000))
              + encode_terminate())
    dec = StreamDecoder()
    out = []
    for i in range(len(stream)):
        out += dec.feed(stream[i:i + 1])
    assert [m.kind for m in out] == [MessageKind.HELLO, MessageKind.ADD,
                                     MessageKind.TERMINATE]
    assert out[1].literals == (100, -200000)


def test_encode_message_inverse():
    for msg in (WireMessage(MessageKind.HELLO, version=1, num_variables=9),
                WireMessage(MessageKind.ADD, literals=(5, -6)),
                WireMessage(MessageKind.DELETE, literals=()),
                WireMessage(MessageKind.TERMINATE)):
        assert decode_all(encode_message(msg)) == [msg]


class ListSink:
    def __init__(self):
        self.events = []
        self.done = threading.Event()
        self.hint = None
        self.reason = None

    def ingest(self, kind, literals):
        self.events.append((kind, literals))

    def producer_connected(self, hint):
        self.hint = hint

    def producer_done(self, reason):
        self.reason = reason
        self.done.set()


def test_loopback_session_in_order():
    sink = ListSink()
    server = ConsumerServer("127.0.0.1", 0, sink).start()
    try:
        events = [(EventKind.ADD, (i, -(i + 1))) for i in range(1, 2000)]
        events += [(EventKind.DELETE, (i,)) for i in range(1, 500)]
        outcome = producer_session(iter(events), ("127.0.0.1", server.port),
                                   num_variables=2000)
        assert outcome.sent == len(events)
        assert sink.done.wait(10)
        assert sink.reason == "terminated"
        assert sink.hint == 2000
        assert sink.events == events
    finally:
        server.stop()


def test_protocol_error_closes_session_keeps_partial_log():
    import socket

    sink = ListSink()
    server = ConsumerServer("127.0.0.1", 0, sink).start()
    try:
        conn = socket.create_connection(("127.0.0.1", server.port), timeout=5)
        payload = (encode_hello(3)
                   + encode_clause_message(EventKind.ADD, (1, 2))
                   + b"\x7e")  # unknown tag corrupts the stream
        conn.sendall(payload)
        assert sink.done.wait(10)
        conn.close()
        assert sink.reason.startswith("protocol_error")
        assert sink.events == [(EventKind.ADD, (1, 2))]  # partial log retained
    finally:
        server.stop()


def test_second_producer_refused_while_active():
    import socket

    class SlowSink(ListSink):
        def ingest(self, kind, literals):
            time.sleep(0.01)
            super().ingest(kind, literals)

    sink = SlowSink()
    server = ConsumerServer("127.0.0.1", 0, sink).start()
    try:
        def produce():
            events = [(EventKind.ADD, (1, 2))] * 100
            producer_session(iter(events), ("127.0.0.1", server.port))

        t = threading.Thread(target=produce)
        t.start()
        time.sleep(0.2)  # the first producer is mid-stream now
        probe = socket.create_connection(("127.0.0.1", server.port), timeout=5)
        probe.settimeout(5)
        # the server closes busy connections immediately: recv sees EOF
        assert probe.recv(1) == b""
        probe.close()
        t.join()
        assert sink.done.wait(10)
    finally:
        server.stop()
