"""External-service clients against stub HTTP services."""

import pytest

from sciqa.errors import ProtocolError, ProviderError, TransportError
from sciqa.reader import ExtractiveReaderClient, GenerativeReaderClient
from sciqa.retrieval import ExternalEmbeddingProvider


class TestEmbeddingClient:
    def test_valid_vectors(self, stub_service):
        def responder(path, payload):
            assert path == "/embed"
            return 200, {"vectors": [[1.0, 0.0], [0.0, 1.0]]}

        with stub_service(responder) as stub:
            provider = ExternalEmbeddingProvider(stub.url)
            vectors = provider.embed(["first", "second"])
        assert len(vectors) == 2
        assert vectors[0].tolist() == [1.0, 0.0]

    def test_ragged_vectors_rejected(self, stub_service):
        def responder(path, payload):
            return 200, {"vectors": [[1.0, 0.0], [0.5]]}

        with stub_service(responder) as stub:
            provider = ExternalEmbeddingProvider(stub.url)
            with pytest.raises(ProviderError, match="ragged"):
                provider.embed(["first", "second"])

    def test_wrong_count_rejected(self, stub_service):
        def responder(path, payload):
            return 200, {"vectors": [[1.0, 0.0]]}

        with stub_service(responder) as stub:
            with pytest.raises(ProviderError):
                ExternalEmbeddingProvider(stub.url).embed(["a", "b"])

    def test_non_2xx_rejected(self, stub_service):
        def responder(path, payload):
            return 503, {"error": "overloaded"}

        with stub_service(responder) as stub:
            with pytest.raises(ProviderError):
                ExternalEmbeddingProvider(stub.url).embed(["a"])

    def test_non_finite_rejected(self, stub_service):
        def responder(path, payload):
            return 200, {"vectors": [["NaN", 1.0]]}

        with stub_service(responder) as stub:
            with pytest.raises(ProviderError, match="non-finite"):
                ExternalEmbeddingProvider(stub.url).embed(["a"])


class TestExtractiveClient:
    CONTEXT = "the incubation period is 14 days"

    def test_valid_span_accepted(self, stub_service):
        start = self.CONTEXT.index("14 days")

        def responder(path, payload):
            assert path == "/extract"
            assert payload["question"] and payload["context"] == self.CONTEXT
            return 200, {"spans": [{"text": "14 days", "start": start,
                                    "end": start + 7, "score": 0.9}]}

        with stub_service(responder) as stub:
            client = ExtractiveReaderClient(stub.url)
            spans = client.answer("how long?", self.CONTEXT)
        assert len(spans) == 1
        assert spans[0].text == "14 days"
        assert self.CONTEXT[spans[0].char_start:spans[0].char_end] == "14 days"

    def test_mismatched_offsets_rejected(self, stub_service):
        def responder(path, payload):
            return 200, {"spans": [{"text": "14 days", "start": 0, "end": 7, "score": 0.9}]}

        with stub_service(responder) as stub:
            client = ExtractiveReaderClient(stub.url)
            with pytest.raises(ProtocolError, match="14 days"):
                client.answer("how long?", self.CONTEXT)

    def test_inverted_offsets_rejected(self, stub_service):
        def responder(path, payload):
            return 200, {"spans": [{"text": "", "start": 9, "end": 9, "score": 0.1}]}

        with stub_service(responder) as stub:
            with pytest.raises(ProtocolError):
                ExtractiveReaderClient(stub.url).answer("q", self.CONTEXT)

    def test_timeout_retried_then_raised(self, stub_service):
        import time

        calls = []

        def responder(path, payload):
            calls.append(path)
            time.sleep(0.5)
            return 200, {"spans": []}

        with stub_service(responder) as stub:
            client = ExtractiveReaderClient(stub.url, timeout=0.1, attempts=2)
            with pytest.raises(TransportError, match="2 attempts"):
                client.answer("q", self.CONTEXT)
        assert len(calls) == 2

    def test_connection_refused_is_transport_error(self):
        client = ExtractiveReaderClient("http://127.0.0.1:9", timeout=0.2, attempts=2)
        with pytest.raises(TransportError):
            client.answer("q", self.CONTEXT)


class TestGenerativeClient:
    def test_text_returned_verbatim(self, stub_service):
        def responder(path, payload):
            assert path == "/generate"
            assert list(payload) == ["question"]  # no context on the wire
            return 200, {"text": "Answer text here."}

        with stub_service(responder) as stub:
            answer = GenerativeReaderClient(stub.url).answer("what?")
        assert answer.text == "Answer text here."
        assert not answer.abstained

    def test_empty_text_is_abstention(self, stub_service):
        def responder(path, payload):
            return 200, {"text": ""}

        with stub_service(responder) as stub:
            answer = GenerativeReaderClient(stub.url).answer("what?")
        assert answer.abstained and answer.text == ""

    def test_context_rejected_before_any_request(self):
        client = GenerativeReaderClient("http://127.0.0.1:9")
        with pytest.raises(ValueError, match="context-free"):
            client.answer("what?", context="some context")

    def test_missing_text_field(self, stub_service):
        def responder(path, payload):
            return 200, {"output": "wrong key"}

        with stub_service(responder) as stub:
            with pytest.raises(ProtocolError):
                GenerativeReaderClient(stub.url).answer("what?")


class TestEndpointConfig:
    def test_empty_endpoint_rejected(self):
        with pytest.raises(ValueError):
            ExtractiveReaderClient("")
        with pytest.raises(ValueError):
            GenerativeReaderClient("")
        with pytest.raises(ValueError):
            ExternalEmbeddingProvider("")
