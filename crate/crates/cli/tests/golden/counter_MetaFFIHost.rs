// Generated by metaffi from counter.tabular (host: rust). Do not edit.

#[allow(dead_code, unused_imports, non_snake_case, non_camel_case_types, clippy::all)]
pub mod counter {
    use metaffi_api::{
        ApiError, CallableValue, EntitySlot, FromValue, HandleValue, IntoValue, MetaFFIType, ModuleBinding, TypeSpec,
        Value,
    };

    pub type Result<T> = std::result::Result<T, ApiError>;

    pub static MODULE: ModuleBinding = ModuleBinding::new("tabular", "counter.tabular");

    /// Loads the module from `module_path` instead of `counter.tabular`.
    pub fn bind(module_path: &str) -> Result<()> {
        MODULE.bind(module_path)
    }

    /// `add(x: int64, y: int64) -> (result: int64)`
    pub fn add(x: i64, y: i64) -> Result<i64> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=add",
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0), TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![x.into_value(), y.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(i64::from_value(next())?)
    }

    /// `add(x: float64, y: float64) -> (result: float64)`
    pub fn add_1(x: f64, y: f64) -> Result<f64> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=add",
            &[TypeSpec::new(MetaFFIType::FLOAT64.0, None, 0), TypeSpec::new(MetaFFIType::FLOAT64.0, None, 0)],
            &[TypeSpec::new(MetaFFIType::FLOAT64.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![x.into_value(), y.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(f64::from_value(next())?)
    }

    /// `sub(x: int64, y: int64) -> (result: int64)`
    pub fn sub(x: i64, y: i64) -> Result<i64> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=sub",
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0), TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![x.into_value(), y.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(i64::from_value(next())?)
    }

    /// `div(x: float64, y: float64) -> (result: float64)`
    pub fn div(x: f64, y: f64) -> Result<f64> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=div",
            &[TypeSpec::new(MetaFFIType::FLOAT64.0, None, 0), TypeSpec::new(MetaFFIType::FLOAT64.0, None, 0)],
            &[TypeSpec::new(MetaFFIType::FLOAT64.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![x.into_value(), y.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(f64::from_value(next())?)
    }

    /// `concat(a: string8, b: string8) -> (result: string8)`
    pub fn concat(a: &str, b: &str) -> Result<String> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=concat",
            &[TypeSpec::new(MetaFFIType::STRING8.0, None, 0), TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
            &[TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![a.into_value(), b.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(String::from_value(next())?)
    }

    /// `call_callback_binary_op(op: callable, x: int64, y: int64) -> (result: int64)`
    pub fn call_callback_binary_op(op: CallableValue, x: i64, y: i64) -> Result<i64> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=call_callback_binary_op",
            &[TypeSpec::new(MetaFFIType::CALLABLE.0, None, 0), TypeSpec::new(MetaFFIType::INT64.0, None, 0), TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![op.into_value(), x.into_value(), y.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(i64::from_value(next())?)
    }

    /// `echo(v: any) -> (result: any)`
    pub fn echo(v: Value) -> Result<Value> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=echo",
            &[TypeSpec::new(MetaFFIType::ANY.0, None, 0)],
            &[TypeSpec::new(MetaFFIType::ANY.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![v.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(Value::from_value(next())?)
    }

    /// `lookup(name: string8) -> (result: handle)`
    pub fn lookup(name: &str) -> Result<HandleValue> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=lookup",
            &[TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
            &[TypeSpec::new(MetaFFIType::HANDLE.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![name.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(HandleValue::from_value(next())?)
    }

    /// `sum(xs: int64_array) -> (result: int64)`
    pub fn sum(xs: Vec<i64>) -> Result<i64> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=sum",
            &[TypeSpec::new(MetaFFIType::INT64.as_array().0, None, 1)],
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![xs.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(i64::from_value(next())?)
    }

    /// `length(s: string8) -> (result: int64)`
    pub fn length(s: &str) -> Result<i64> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=length",
            &[TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![s.into_value()])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(i64::from_value(next())?)
    }

    /// `answer() -> (result: int64)`
    pub fn answer() -> Result<i64> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=answer",
            &[],
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(i64::from_value(next())?)
    }

    /// `noop() -> ()`
    pub fn noop() -> Result<()> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=noop",
            &[],
            &[],
        );
        SLOT.call(&MODULE, vec![])?;
        Ok(())
    }

    /// `broken() -> ()`
    pub fn broken() -> Result<()> {
        static SLOT: EntitySlot = EntitySlot::new(
            "callable=broken",
            &[],
            &[],
        );
        SLOT.call(&MODULE, vec![])?;
        Ok(())
    }

    /// `get_total() -> (total: int64)`
    pub fn get_total() -> Result<i64> {
        static SLOT: EntitySlot = EntitySlot::new(
            "global=total,getter",
            &[],
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(i64::from_value(next())?)
    }

    /// `set_total(total: int64) -> ()`
    pub fn set_total(total: i64) -> Result<()> {
        static SLOT: EntitySlot = EntitySlot::new(
            "global=total,setter",
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
            &[],
        );
        SLOT.call(&MODULE, vec![total.into_value()])?;
        Ok(())
    }

    /// `get_version() -> (version: string8)`
    pub fn get_version() -> Result<String> {
        static SLOT: EntitySlot = EntitySlot::new(
            "global=version,getter",
            &[],
            &[TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
        );
        let mut out = SLOT.call(&MODULE, vec![])?.into_iter();
        let mut next = || out.next().unwrap_or(Value::Null);
        Ok(String::from_value(next())?)
    }

    /// `set_sink(sink: int64) -> ()`
    pub fn set_sink(sink: i64) -> Result<()> {
        static SLOT: EntitySlot = EntitySlot::new(
            "global=sink,setter",
            &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
            &[],
        );
        SLOT.call(&MODULE, vec![sink.into_value()])?;
        Ok(())
    }

    /// Foreign class `Counter`. Dropping it releases the handle.
    pub struct Counter {
        handle: HandleValue,
    }

    impl Counter {
        pub fn from_handle(handle: HandleValue) -> Counter {
            Counter { handle }
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

        /// `new(value: int64) -> (result: handle<Counter>)`
        pub fn new(value: i64) -> Result<Counter> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,callable=<init>",
                &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0)],
            );
            let mut out = SLOT.call(&MODULE, vec![value.into_value()])?.into_iter();
            let mut next = || out.next().unwrap_or(Value::Null);
            Ok(Counter::from_handle(HandleValue::from_value(next())?))
        }

        /// `new() -> (result: handle<Counter>)`
        pub fn new_1() -> Result<Counter> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,callable=<init>",
                &[],
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0)],
            );
            let mut out = SLOT.call(&MODULE, vec![])?.into_iter();
            let mut next = || out.next().unwrap_or(Value::Null);
            Ok(Counter::from_handle(HandleValue::from_value(next())?))
        }

        /// `inc(this_instance: handle<Counter>) -> ()`
        pub fn inc(&self) -> Result<()> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,callable=inc,instance_required",
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0)],
                &[],
            );
            SLOT.call(&MODULE, vec![Value::Handle(self.handle)])?;
            Ok(())
        }

        /// `add(this_instance: handle<Counter>, n: int64) -> (result: int64)`
        pub fn add(&self, n: i64) -> Result<i64> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,callable=add,instance_required",
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0), TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
                &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
            );
            let mut out = SLOT.call(&MODULE, vec![Value::Handle(self.handle), n.into_value()])?.into_iter();
            let mut next = || out.next().unwrap_or(Value::Null);
            Ok(i64::from_value(next())?)
        }

        /// `reset(this_instance: handle<Counter>, value: int64) -> ()`
        pub fn reset(&self, value: i64) -> Result<()> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,callable=reset,instance_required",
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0), TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
                &[],
            );
            SLOT.call(&MODULE, vec![Value::Handle(self.handle), value.into_value()])?;
            Ok(())
        }

        /// `zero() -> (result: handle<Counter>)`
        pub fn zero() -> Result<Counter> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,callable=zero",
                &[],
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0)],
            );
            let mut out = SLOT.call(&MODULE, vec![])?.into_iter();
            let mut next = || out.next().unwrap_or(Value::Null);
            Ok(Counter::from_handle(HandleValue::from_value(next())?))
        }

        /// `get_value(this_instance: handle<Counter>) -> (value: int64)`
        pub fn get_value(&self) -> Result<i64> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,field=value,getter,instance_required",
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0)],
                &[TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
            );
            let mut out = SLOT.call(&MODULE, vec![Value::Handle(self.handle)])?.into_iter();
            let mut next = || out.next().unwrap_or(Value::Null);
            Ok(i64::from_value(next())?)
        }

        /// `set_value(this_instance: handle<Counter>, value: int64) -> ()`
        pub fn set_value(&self, value: i64) -> Result<()> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,field=value,setter,instance_required",
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0), TypeSpec::new(MetaFFIType::INT64.0, None, 0)],
                &[],
            );
            SLOT.call(&MODULE, vec![Value::Handle(self.handle), value.into_value()])?;
            Ok(())
        }

        /// `get_label(this_instance: handle<Counter>) -> (label: string8)`
        pub fn get_label(&self) -> Result<String> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,field=label,getter,instance_required",
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0)],
                &[TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
            );
            let mut out = SLOT.call(&MODULE, vec![Value::Handle(self.handle)])?.into_iter();
            let mut next = || out.next().unwrap_or(Value::Null);
            Ok(String::from_value(next())?)
        }

        /// `set_label(this_instance: handle<Counter>, label: string8) -> ()`
        pub fn set_label(&self, label: &str) -> Result<()> {
            static SLOT: EntitySlot = EntitySlot::new(
                "class=Counter,field=label,setter,instance_required",
                &[TypeSpec::new(MetaFFIType::HANDLE.0, Some("Counter"), 0), TypeSpec::new(MetaFFIType::STRING8.0, None, 0)],
                &[],
            );
            SLOT.call(&MODULE, vec![Value::Handle(self.handle), label.into_value()])?;
            Ok(())
        }
    }

    impl Drop for Counter {
        fn drop(&mut self) {
            self.handle.release();
        }
    }
}
