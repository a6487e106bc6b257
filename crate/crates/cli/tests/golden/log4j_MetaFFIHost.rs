// Generated by metaffi from log4j.tabular (host: rust). Do not edit.

#[allow(dead_code, unused_imports, non_snake_case, non_camel_case_types, clippy::all)]
pub mod log4j {
    use metaffi_api::{
        ApiError, CallableValue, EntitySlot, FromValue, HandleValue, IntoValue, MetaFFIType, ModuleBinding, TypeSpec,
        Value,
    };

    pub type Result<T> = std::result::Result<T, ApiError>;

    pub static MODULE: ModuleBinding = ModuleBinding::new("tabular", "log4j.tabular");

    /// Loads the module from `module_path` instead of `log4j.tabular`.
    pub fn bind(module_path: &str) -> Result<()> {
        MODULE.bind(module_path)
    }

    /// Foreign class `org.apache.logging.log4j.LogManager`. Dropping it releases the handle.
    pub struct LogManager {
        handle: HandleValue,
    }

    impl LogManager {
        pub fn from_handle(handle: HandleValue) -> LogManager {
            LogManager { handle }
        }

        pub fn handle(&self) -> &HandleValue {
            &self.handle
        }

        /// Gives up ownership without releasing.
        pub fn into_handle(self) -> HandleValue {
            let h = self.handle;
            std::mem::forget(self);
            h
        }

        /// `getLogger(name: string8) -> (result: handle<org.apache.logging.log4j.Logger>)`
        pub fn getLogger(name: &str) -> Result<Logger> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=org.apache.logging.log4j.LogManager,callable=getLogger",
                &[TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("org.apache.logging.log4j.Logger"), 0)],
            );
            let mut out = SLOT.call(&MODULE, vec![name.into_value()])?.into_iter();
            let mut next = || out.next().unwrap_or(Value::Null);
            Ok(Logger::from_handle(HandleValue::from_value(next())?))
        }
    }

    impl Drop for LogManager {
        fn drop(&mut self) {
            self.handle.release();
        }
    }

    /// Foreign class `org.apache.logging.log4j.Logger`. Dropping it releases the handle.
    pub struct Logger {
        handle: HandleValue,
    }

    impl Logger {
        pub fn from_handle(handle: HandleValue) -> Logger {
            Logger { handle }
        }

        pub fn handle(&self) -> &HandleValue {
            &self.handle
        }

        /// Gives up ownership without releasing.
        pub fn into_handle(self) -> HandleValue {
            let h = self.handle;
            std::mem::forget(self);
            h
        }

        /// `getName(this_instance: handle<org.apache.logging.log4j.Logger>) -> (result: string8)`
        pub fn getName(&self) -> Result<String> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=org.apache.logging.log4j.Logger,callable=getName,instance_required",
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("org.apache.logging.log4j.Logger"), 0)],
                &[TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
            );
            let mut out = SLOT.call(&MODULE, vec![Value::Handle(self.handle)])?.into_iter();
            let mut next = || out.next().unwrap_or(Value::Null);
            Ok(String::from_value(next())?)
        }

        /// `get_name(this_instance: handle<org.apache.logging.log4j.Logger>) -> (name: string8)`
        pub fn get_name(&self) -> Result<String> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=org.apache.logging.log4j.Logger,field=name,getter,instance_required",
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("org.apache.logging.log4j.Logger"), 0)],
                &[TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
            );
            let mut out = SLOT.call(&MODULE, vec![Value::Handle(self.handle)])?.into_iter();
            let mut next = || out.next().unwrap_or(Value::Null);
            Ok(String::from_value(next())?)
        }
    }

    impl Drop for Logger {
        fn drop(&mut self) {
            self.handle.release();
        }
    }
}
