"""Smoke test for the Python bindings: enroll, present twice, transfer, recover."""

import hashlib
import hmac
import os
import struct

import eudinym_py as ey


def check_hmac_nym():
    seed = os.urandom(32)
    scope = "shop.example"
    msg = struct.pack(">I", len(scope)) + scope.encode() + struct.pack(">Q", 3)
    assert ey.hmac_nym(seed, scope, 3) == hmac.new(seed, msg, hashlib.sha256).digest()


def enroll(issuer, wallet, holder):
    req = wallet.enroll_request(issuer.public_key())
    resp = issuer.enroll(holder, req, {"age_over_18": b"true", "expiry": b"2030-01-01"})
    wallet.enroll_finish(resp)


def main():
    check_hmac_nym()

    issuer = ey.Issuer(["age_over_18", "expiry"])
    wallet = ey.Wallet()
    enroll(issuer, wallet, "alice")
    rp = ey.RelyingParty("shop.example", issuer.public_key(), require=["age_over_18"])

    p = wallet.present(rp.info(), 1, disclose=["age_over_18"])
    status, account, disclosed = rp.authenticate(p)
    assert status == "new" and disclosed == {"age_over_18": b"true"}
    status, again, _ = rp.authenticate(wallet.present(rp.info(), 1, disclose=["age_over_18"]))
    assert (status, again) == ("returning", account)

    try:
        rp.authenticate(p, context=b"other session")
        raise AssertionError("replay accepted")
    except ey.EudinymError as e:
        assert str(e).startswith("context-mismatch")

    secret, public = ey.transfer_keygen()
    moved = ey.import_wallet(ey.export_wallet(wallet, public), secret)
    restored = ey.restore_wallet(ey.backup_wallet(wallet, "a long passphrase"), "a long passphrase")
    for w in (moved, restored):
        enroll(issuer, w, "alice")
        status, label, _ = rp.authenticate(w.present(rp.info(), 1, disclose=["age_over_18"]))
        assert (status, label) == ("returning", account)

    dy = ey.RelyingParty("forum.example", issuer.public_key(), mode="dy", bound=2)
    for idx in (1, 2):
        assert dy.authenticate(wallet.present(dy.info(), idx))[0] == "new"
    try:
        wallet.present(dy.info(), 3)
        raise AssertionError("index above bound accepted")
    except ey.EudinymError as e:
        assert str(e).startswith("index-out-of-range")

    assert ey.test_vectors("hmac") == ey.test_vectors("hmac")
    assert ey.exit_codes()["scope-mismatch"] == 40
    assert ey.Wallet.from_bytes(wallet.to_bytes()).to_bytes() == wallet.to_bytes()
    print("smoke test passed:", rp.account_count, "account,", dy.account_count, "rate-limited accounts")


if __name__ == "__main__":
    main()
