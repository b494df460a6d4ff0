//! Out-of-band delivery of one-time codes.

use alloc::string::String;

/// Identifier returned by a transport for a dispatched message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeliveryId(pub String);

/// Dispatch failure. The message never includes the body being sent.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("sms transport failed: {0}")]
pub struct TransportError(pub String);

pub trait SmsTransport {
    fn send(&self, destination: &str, body: &str) -> Result<DeliveryId, TransportError>;
}

impl<T: SmsTransport + ?Sized> SmsTransport for &T {
    fn send(&self, destination: &str, body: &str) -> Result<DeliveryId, TransportError> {
        (**self).send(destination, body)
    }
}

impl<T: SmsTransport + ?Sized> SmsTransport for alloc::boxed::Box<T> {
    fn send(&self, destination: &str, body: &str) -> Result<DeliveryId, TransportError> {
        (**self).send(destination, body)
    }
}

impl<T: SmsTransport + ?Sized> SmsTransport for alloc::sync::Arc<T> {
    fn send(&self, destination: &str, body: &str) -> Result<DeliveryId, TransportError> {
        (**self).send(destination, body)
    }
}
