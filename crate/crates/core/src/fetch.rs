//! Abstract fetch client.
