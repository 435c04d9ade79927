use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::Value;

use ann_core::corpus::CorpusError;
use ann_core::metadata::MetadataError;
use ann_core::serialization::SerializationError;
use ann_core::store::StoreError;
use ann_core::tagset::TagError;

use crate::claims::ClaimError;

/// Error response. The body is `{"code": ..., "message": ...}` plus
/// optional `details`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<&'a Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn with_details(mut self, details: Value) -> ApiError {
        self.details = Some(details);
        self
    }

    pub fn unauthorized(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::UNAUTHORIZED, "Unauthorized", message)
    }

    pub fn unprocessable(code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            code: self.code,
            message: &self.message,
            details: self.details.as_ref(),
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<CorpusError> for ApiError {
    fn from(e: CorpusError) -> ApiError {
        let message = e.to_string();
        match e {
            CorpusError::UnknownDocument(id) => {
                ApiError::new(StatusCode::NOT_FOUND, "UnknownDocument", message)
                    .with_details(serde_json::json!({ "doc_id": id }))
            }
            CorpusError::UnknownSentence(id) => {
                ApiError::new(StatusCode::NOT_FOUND, "UnknownSentence", message)
                    .with_details(serde_json::json!({ "sentence_id": id }))
            }
            CorpusError::IndexOutOfRange { index, len } => {
                ApiError::unprocessable("IndexOutOfRange", message)
                    .with_details(serde_json::json!({ "index": index, "len": len }))
            }
            CorpusError::NoSuggestion { index } => ApiError::unprocessable("NoSuggestion", message)
                .with_details(serde_json::json!({ "index": index })),
            CorpusError::DuplicateDocument(_) | CorpusError::DuplicateSentenceId(_) => {
                ApiError::new(StatusCode::CONFLICT, "Duplicate", message)
            }
            CorpusError::Tag(t) => t.into(),
            _ => ApiError::unprocessable("InvalidCorpusOperation", message),
        }
    }
}

impl From<TagError> for ApiError {
    fn from(e: TagError) -> ApiError {
        let message = e.to_string();
        match e {
            TagError::UnknownLabel(label) => ApiError::unprocessable("UnknownLabel", message)
                .with_details(serde_json::json!({ "label": label })),
            TagError::UnknownTag(tag) => ApiError::unprocessable("UnknownTag", message)
                .with_details(serde_json::json!({ "tag": tag })),
        }
    }
}

impl From<ClaimError> for ApiError {
    fn from(e: ClaimError) -> ApiError {
        let message = e.to_string();
        match e {
            ClaimError::HeldBy { annotator_id, .. } => {
                ApiError::new(StatusCode::CONFLICT, "ClaimConflict", message)
                    .with_details(serde_json::json!({ "held_by": annotator_id }))
            }
            ClaimError::NotHeld { .. } => ApiError::new(StatusCode::CONFLICT, "NoActiveClaim", message),
        }
    }
}

impl From<SerializationError> for ApiError {
    fn from(e: SerializationError) -> ApiError {
        match e {
            SerializationError::CatalogInvalid(report) => {
                ApiError::unprocessable("CatalogInvalid", "catalog validation failed")
                    .with_details(serde_json::to_value(report).unwrap_or(Value::Null))
            }
            SerializationError::Corpus(c) => c.into(),
            other => ApiError::unprocessable("SerializationFailed", other.to_string()),
        }
    }
}

impl From<MetadataError> for ApiError {
    fn from(e: MetadataError) -> ApiError {
        match e {
            MetadataError::CatalogInvalid(report) => {
                ApiError::unprocessable("CatalogInvalid", "catalog validation failed")
                    .with_details(serde_json::to_value(report).unwrap_or(Value::Null))
            }
            other => ApiError::unprocessable("InvalidMetadata", other.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> ApiError {
        ApiError::internal(e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> ApiError {
        ApiError::unprocessable("InvalidBody", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> ApiError {
        ApiError::unprocessable("InvalidQuery", e.body_text())
    }
}
