//! HTTP adapter for remote forecasting services.
//!
//! One POST to `{endpoint}/v1/forecast` per call with body
//! `{"series": [...], "horizon": n, "model": "..."}`; the service answers
//! `{"forecast": [...]}`. No retries unless configured, so black-box query
//! accounting stays exact. Concurrency is the caller's concern: each call is
//! one blocking round trip and the adapter holds no shared state.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Forecast, ForecastError};

#[derive(Serialize)]
struct ForecastRequest<'a> {
    series: &'a [f64],
    horizon: usize,
    model: &'a str,
}

#[derive(Deserialize)]
struct ForecastResponse {
    forecast: Vec<f64>,
}

fn shared_client() -> Result<&'static reqwest::blocking::Client, ForecastError> {
    static CLIENT: std::sync::OnceLock<Option<reqwest::blocking::Client>> =
        std::sync::OnceLock::new();
    CLIENT
        .get_or_init(|| reqwest::blocking::Client::builder().build().ok())
        .as_ref()
        .ok_or_else(|| ForecastError::RemoteTransport("cannot build http client".into()))
}

/// One forecast round trip. The response must contain exactly `horizon`
/// finite values.
pub fn remote_forecast(
    endpoint: &str,
    model: &str,
    context: &[f64],
    horizon: usize,
    timeout: Duration,
) -> Result<Forecast, ForecastError> {
    let url = format!("{}/v1/forecast", endpoint.trim_end_matches('/'));
    let response = shared_client()?
        .post(&url)
        .timeout(timeout)
        .json(&ForecastRequest {
            series: context,
            horizon,
            model,
        })
        .send()
        .map_err(|e| ForecastError::RemoteTransport(e.to_string()))?;

    let status = response.status();
    if !status.is_success() {
        return Err(ForecastError::RemoteStatus {
            status: status.as_u16(),
        });
    }

    let payload: ForecastResponse = response
        .json()
        .map_err(|e| ForecastError::RemotePayload(e.to_string()))?;
    if payload.forecast.len() != horizon {
        return Err(ForecastError::HorizonMismatch {
            requested: horizon,
            got: payload.forecast.len(),
        });
    }
    if let Some(step) = payload.forecast.iter().position(|v| !v.is_finite()) {
        return Err(ForecastError::NonFinite { step });
    }
    Ok(Forecast {
        values: payload.forecast,
    })
}

/// [`remote_forecast`] with a bounded retry loop. Transport failures and 5xx
/// statuses are retried after `backoff`; contract violations (bad payload,
/// horizon mismatch, 4xx) are not.
pub fn remote_forecast_with_retries(
    endpoint: &str,
    model: &str,
    context: &[f64],
    horizon: usize,
    timeout: Duration,
    retries: u32,
    backoff: Duration,
) -> Result<Forecast, ForecastError> {
    let mut attempt = 0;
    loop {
        match remote_forecast(endpoint, model, context, horizon, timeout) {
            Ok(forecast) => return Ok(forecast),
            Err(err) if attempt < retries && is_retryable(&err) => {
                attempt += 1;
                std::thread::sleep(backoff);
            }
            Err(err) => return Err(err),
        }
    }
}

fn is_retryable(err: &ForecastError) -> bool {
    match err {
        ForecastError::RemoteTransport(_) => true,
        ForecastError::RemoteStatus { status } => *status >= 500,
        _ => false,
    }
}
